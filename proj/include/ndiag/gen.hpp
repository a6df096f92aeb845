#pragma once

// Deterministic generators for the test corpus: inverter chains (tree
// structures), ripple-carry adders cascaded from full adders, and random
// bounded-fan-in gate circuits. Output is the native SSD text format plus an
// observation file; identical parameters and seed give identical bytes.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "ndiag/util.hpp"

namespace ndiag {

struct GeneratedInstance {
    std::string ssd_text;
    std::string obs_text;
};

namespace gentext {

inline void emit_not(std::ostringstream& out, const std::string& o, const std::string& a,
                     const std::string& ok) {
    out << "component " << o << " : " << a << "\n";
    out << "clause " << o << " : !" << a << " !" << o << " | !" << ok << "\n";
    out << "clause " << o << " : " << a << " " << o << " | !" << ok << "\n";
}

inline void emit_buf(std::ostringstream& out, const std::string& o, const std::string& a,
                     const std::string& ok) {
    out << "component " << o << " : " << a << "\n";
    out << "clause " << o << " : !" << a << " " << o << " | !" << ok << "\n";
    out << "clause " << o << " : " << a << " !" << o << " | !" << ok << "\n";
}

inline void emit_and(std::ostringstream& out, const std::string& o,
                     const std::vector<std::string>& in, const std::string& ok) {
    out << "component " << o << " :";
    for (const auto& a : in) out << " " << a;
    out << "\n";
    out << "clause " << o << " :";
    for (const auto& a : in) out << " !" << a;
    out << " " << o << " | !" << ok << "\n";
    for (const auto& a : in)
        out << "clause " << o << " : " << a << " !" << o << " | !" << ok << "\n";
}

inline void emit_or(std::ostringstream& out, const std::string& o,
                    const std::vector<std::string>& in, const std::string& ok) {
    out << "component " << o << " :";
    for (const auto& a : in) out << " " << a;
    out << "\n";
    out << "clause " << o << " :";
    for (const auto& a : in) out << " " << a;
    out << " !" << o << " | !" << ok << "\n";
    for (const auto& a : in)
        out << "clause " << o << " : !" << a << " " << o << " | !" << ok << "\n";
}

inline void emit_xor2(std::ostringstream& out, const std::string& o, const std::string& a,
                      const std::string& b, const std::string& ok) {
    out << "component " << o << " : " << a << " " << b << "\n";
    out << "clause " << o << " : !" << a << " !" << b << " !" << o << " | !" << ok << "\n";
    out << "clause " << o << " : " << a << " " << b << " !" << o << " | !" << ok << "\n";
    out << "clause " << o << " : !" << a << " " << b << " " << o << " | !" << ok << "\n";
    out << "clause " << o << " : " << a << " !" << b << " " << o << " | !" << ok << "\n";
}

}  // namespace gentext

// Chain of n inverters: nodes N0 .. Nn, one assumable per inverter. The
// structure is a path, so the jointree has width 1.
inline GeneratedInstance gen_chain_inverters(int n) {
    require(n >= 1, "chain length must be at least 1");
    std::ostringstream ssd;
    ssd << "# inverter chain, length " << n << "\n";
    ssd << "var N0\n";
    for (int i = 1; i <= n; ++i) {
        ssd << "assumable ok" << i << "\n";
        ssd << "var N" << i << "\n";
    }
    ssd << "component N0\n";
    for (int i = 1; i <= n; ++i)
        gentext::emit_not(ssd, "N" + std::to_string(i), "N" + std::to_string(i - 1),
                          "ok" + std::to_string(i));
    return GeneratedInstance{ssd.str(), ""};
}

enum class AdderObservation { none, first_sum_high, all_sums_high };

// Ripple-carry adder from full adders, each built from five two-input gates
// (two xors on the sum path, two ands and an or on the carry path), one
// assumable per gate. The observable bit lines are the operand bits, every
// carry, and every sum bit; the intra-adder wires stay hidden.
//
// first_sum_high observes all bit lines low except the first sum bit;
// all_sums_high observes every sum bit high and everything else low.
inline GeneratedInstance gen_adder(int bits, AdderObservation obs_kind) {
    require(bits >= 1, "adder needs at least 1 bit");
    std::ostringstream ssd;
    ssd << "# " << bits << "-bit ripple-carry adder\n";
    for (int i = 0; i < bits; ++i) ssd << "var a" << i << "\n";
    for (int i = 0; i < bits; ++i) ssd << "var b" << i << "\n";
    ssd << "var c0\n";
    for (int i = 0; i < bits; ++i) {
        ssd << "assumable okx" << i << "\n";
        ssd << "var x" << i << "\n";
        ssd << "assumable oks" << i << "\n";
        ssd << "var s" << i << "\n";
        ssd << "assumable okg" << i << "\n";
        ssd << "var g" << i << "\n";
        ssd << "assumable okh" << i << "\n";
        ssd << "var h" << i << "\n";
        ssd << "assumable okc" << (i + 1) << "\n";
        ssd << "var c" << (i + 1) << "\n";
    }
    for (int i = 0; i < bits; ++i) ssd << "component a" << i << "\n";
    for (int i = 0; i < bits; ++i) ssd << "component b" << i << "\n";
    ssd << "component c0\n";
    for (int i = 0; i < bits; ++i) {
        std::string a = "a" + std::to_string(i);
        std::string b = "b" + std::to_string(i);
        std::string cin = "c" + std::to_string(i);
        std::string x = "x" + std::to_string(i);
        std::string s = "s" + std::to_string(i);
        std::string g = "g" + std::to_string(i);
        std::string h = "h" + std::to_string(i);
        std::string cout = "c" + std::to_string(i + 1);
        std::string idx = std::to_string(i);
        gentext::emit_xor2(ssd, x, a, b, "okx" + idx);
        gentext::emit_xor2(ssd, s, x, cin, "oks" + idx);
        gentext::emit_and(ssd, g, {a, b}, "okg" + idx);
        gentext::emit_and(ssd, h, {x, cin}, "okh" + idx);
        gentext::emit_or(ssd, cout, {g, h}, "okc" + std::to_string(i + 1));
    }

    std::ostringstream obs;
    if (obs_kind != AdderObservation::none) {
        for (int i = 0; i < bits; ++i) obs << "!a" << i << " ";
        for (int i = 0; i < bits; ++i) obs << "!b" << i << " ";
        for (int i = 0; i <= bits; ++i) obs << "!c" << i << " ";
        for (int i = 0; i < bits; ++i) {
            bool high = obs_kind == AdderObservation::all_sums_high ||
                        (obs_kind == AdderObservation::first_sum_high && i == 0);
            obs << (high ? "" : "!") << "s" << i << " ";
        }
        obs << "\n";
    }
    return GeneratedInstance{ssd.str(), obs.str()};
}

struct RandomCircuitParams {
    int max_components = 6;  // gates, each contributing one assumable
    int max_atoms = 10;      // total variables, assumables included
    int max_fan_in = 3;
    bool with_observation = true;
    // chance that a node is observed, as obs_chance_num / obs_chance_den
    uint64_t obs_chance_num = 1;
    uint64_t obs_chance_den = 3;
};

// Random DAG circuit within the given bounds. Gates draw inputs from earlier
// nodes, so the structure is acyclic by construction.
inline GeneratedInstance gen_random_circuit(uint64_t seed,
                                            const RandomCircuitParams& params = {}) {
    Rng rng(seed);
    int roots = 1 + static_cast<int>(rng.below(3));
    int budget = (params.max_atoms - roots) / 2;  // a gate costs output + assumable
    int max_gates = std::min(params.max_components, budget);
    require(max_gates >= 1, "atom budget leaves no room for gates");
    int gates = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_gates)));

    std::ostringstream ssd;
    ssd << "# random circuit, seed " << seed << "\n";
    std::vector<std::string> nodes;
    for (int i = 0; i < roots; ++i) {
        std::string name = "r" + std::to_string(i);
        ssd << "var " << name << "\n";
        nodes.push_back(name);
    }
    std::ostringstream components;
    for (int i = 0; i < roots; ++i) components << "component r" << i << "\n";
    for (int i = 0; i < gates; ++i) {
        std::string out = "n" + std::to_string(i);
        std::string ok = "okn" + std::to_string(i);
        ssd << "assumable " << ok << "\n";
        ssd << "var " << out << "\n";
        int kind = static_cast<int>(rng.below(7));
        int want = (kind == 5 || kind == 6) ? 3 : (kind <= 1 ? 1 : 2);
        want = std::min({want, static_cast<int>(nodes.size()), params.max_fan_in});
        // sample distinct inputs from the existing nodes
        std::vector<std::string> pool = nodes;
        std::vector<std::string> in;
        for (int k = 0; k < want; ++k) {
            size_t pick = rng.below(pool.size());
            in.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<long>(pick));
        }
        if (want == 1) {
            if (kind % 2 == 0)
                gentext::emit_not(components, out, in[0], ok);
            else
                gentext::emit_buf(components, out, in[0], ok);
        } else if (kind == 4 && want == 2) {
            gentext::emit_xor2(components, out, in[0], in[1], ok);
        } else if (kind == 2 || kind == 5) {
            gentext::emit_and(components, out, in, ok);
        } else {
            gentext::emit_or(components, out, in, ok);
        }
        nodes.push_back(out);
    }
    ssd << components.str();

    std::ostringstream obs;
    if (params.with_observation) {
        for (const auto& name : nodes)
            if (rng.chance(params.obs_chance_num, params.obs_chance_den))
                obs << (rng.chance(1, 2) ? "" : "!") << name << " ";
        obs << "\n";
    }
    return GeneratedInstance{ssd.str(), obs.str()};
}

}  // namespace ndiag
