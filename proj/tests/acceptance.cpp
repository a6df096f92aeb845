// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Logical results are checked exactly; the few runtime budgets are generous
// wall-clock bounds for a desktop machine.

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ndiag/compile.hpp"
#include "ndiag/diagnose.hpp"
#include "ndiag/gen.hpp"
#include "ndiag/jointree.hpp"
#include "ndiag/oracle.hpp"
#include "ndiag/ssd.hpp"

using namespace ndiag;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw Error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string data_path(const std::string& name) {
    return std::string(NDIAG_DATA_DIR) + "/" + name;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Tracker {
    bool all_cache_bounds_ok = true;
    int compilations = 0;
};

Tracker tracker;

// Every compilation in the suite goes through here so the cache-count bound
// is checked across all of them.
CompileResult checked_compile(const Ssd& ssd, const Observation& obs,
                              const CompileOptions& options = {}) {
    CompileResult result = compile_consequence(ssd, obs, options);
    ++tracker.compilations;
    if (!result.stats.within_cache_bounds()) tracker.all_cache_bounds_ok = false;
    return result;
}

std::vector<Instantiation> sorted_models(const Ssd& ssd, const NnfGraph& g,
                                         uint64_t cap = default_model_cap) {
    auto models = enumerate_models(g, ssd.assumable_set(), ssd.vars, cap);
    std::sort(models.begin(), models.end());
    return models;
}

Instantiation named_inst(const Ssd& ssd, const std::string& text) {
    std::vector<Literal> lits;
    for (const auto& tok : split_ws(text)) lits.push_back(parse_literal(ssd.vars, tok));
    return Instantiation::of(std::move(lits));
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

// --- criterion bodies -------------------------------------------------------

Outcome criterion_1() {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    Ssd two_gate = parse_ssd(read_file(data_path("two_gate.ssd")));
    Observation obs = parse_observation("C D", two_gate);
    CompileResult result = checked_compile(two_gate, obs);

    NnfGraph ref;
    NodeId d = ref.or_node();
    ref.add_child(d, ref.literal_node({two_gate.vars.find("okX"), 0}));
    ref.add_child(d, ref.literal_node({two_gate.vars.find("okY"), 0}));
    ref.set_root(d);
    o.expect(equivalent(result.consequence, ref, two_gate.assumable_set(), two_gate.vars),
             "compiled consequence is not equivalent to the two-fault clause");

    auto diagnoses = brute_diagnoses(two_gate, obs);
    std::vector<Instantiation> expected{
        named_inst(two_gate, "okX !okY"),
        named_inst(two_gate, "!okX okY"),
        named_inst(two_gate, "!okX !okY"),
    };
    std::sort(expected.begin(), expected.end());
    o.expect(diagnoses == expected, "oracle does not report exactly the three diagnoses");
    o.expect(seconds_since(start) < 1.0, "runtime exceeded 1 s");
    return o;
}

Outcome criterion_2() {
    Outcome o;
    Ssd three_gate = parse_ssd(read_file(data_path("three_gate.ssd")));
    NnfGraph g;
    ComponentTable table =
        component_consequences(three_gate, three_gate.description_of(three_gate.vars.find("D")), g);
    o.expect(table.entries.size() == 8, "or-gate table does not have 8 entries");
    VarId oky = three_gate.vars.find("okY");
    for (uint64_t idx : {0, 5, 6, 7})
        o.expect(g.is_true(table.entries.at(idx)),
                 "entry " + std::to_string(idx) + " is not true");
    for (uint64_t idx : {1, 2, 3, 4}) {
        NodeId e = table.entries.at(idx);
        o.expect(g.kind(e) == NnfKind::literal && g.node(e).lit == Literal{oky, 0},
                 "entry " + std::to_string(idx) + " is not the okY fault literal");
    }
    return o;
}

NnfGraph compile_supplied_tree(const Ssd& three_gate, const JointreeFile& file, Outcome& o) {
    CompileOptions options;
    options.jointree = &file.jointree;
    options.assignment = &file.assignment;
    options.pivot = file.index_of_id.at(1);
    Observation obs = parse_observation("A E", three_gate);
    CompileResult result = checked_compile(three_gate, obs, options);
    o.expect(is_decomposable(result.consequence), "consequence is not decomposable");
    return std::move(result.consequence);
}

Outcome criterion_3() {
    Outcome o;
    Ssd three_gate = parse_ssd(read_file(data_path("three_gate.ssd")));
    JointreeFile file = parse_jointree(read_file(data_path("three_gate.jt")), three_gate);
    NnfGraph consequence = compile_supplied_tree(three_gate, file, o);

    NnfGraph ref;
    NodeId d = ref.or_node();
    ref.add_child(d, ref.literal_node({three_gate.vars.find("okX"), 0}));
    ref.add_child(d, ref.literal_node({three_gate.vars.find("okZ"), 0}));
    ref.set_root(d);
    o.expect(equivalent(consequence, ref, three_gate.assumable_set(), three_gate.vars),
             "consequence is not equivalent to the inverter-or-and-gate clause");
    return o;
}

Outcome criterion_4() {
    Outcome o;
    Ssd three_gate = parse_ssd(read_file(data_path("three_gate.ssd")));
    JointreeFile file = parse_jointree(read_file(data_path("three_gate.jt")), three_gate);
    NnfGraph consequence = compile_supplied_tree(three_gate, file, o);
    CostFunction card = make_cardinality(three_gate);

    ExtractionState state = prune(consequence, card, three_gate.vars);
    o.expect(state.cost.at(static_cast<size_t>(consequence.root())) == 1,
             "root cost after pruning is not 1");

    DiagnosisResult result = minimal_diagnoses(three_gate, consequence, card);
    std::vector<Instantiation> expected{
        named_inst(three_gate, "okX okY !okZ"),
        named_inst(three_gate, "!okX okY okZ"),
    };
    std::sort(expected.begin(), expected.end());
    o.expect(result.status == DiagnosisStatus::ok && result.cost == 1 &&
                 result.diagnoses == expected,
             "extracted minimal diagnoses are not the expected pair at cost 1");
    return o;
}

Outcome criterion_5() {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    const uint64_t oracle_cap = uint64_t(1) << 40;

    auto scenario = [&](AdderObservation kind, Cost want_cost, size_t want_count,
                        const char* label) {
        GeneratedInstance gi = gen_adder(3, kind);
        Ssd adder = parse_ssd(gi.ssd_text);
        Observation obs = parse_observation(gi.obs_text, adder);
        CompileResult compiled = checked_compile(adder, obs);
        CostFunction card = make_cardinality(adder);
        DiagnosisResult mine = minimal_diagnoses(adder, compiled.consequence, card);
        o.expect(mine.status == DiagnosisStatus::ok && mine.cost == want_cost &&
                     mine.diagnoses.size() == want_count,
                 std::string(label) + ": extraction disagrees with the expected count/cost");
        BruteMinimalResult brute = brute_minimal(adder, obs, card, oracle_cap);
        o.expect(brute.cost == mine.cost && brute.diagnoses == mine.diagnoses,
                 std::string(label) + ": oracle disagrees with the extraction");
    };
    scenario(AdderObservation::first_sum_high, 1, 2, "first-sum-high");
    scenario(AdderObservation::all_sums_high, 3, 8, "all-sums-high");
    o.expect(seconds_since(start) < 10.0, "runtime exceeded 10 s");
    return o;
}

Outcome criterion_6() {
    Outcome o;
    for (uint64_t seed = 0; seed < 200 && o.pass; ++seed) {
        GeneratedInstance gi = gen_random_circuit(seed);
        Ssd ssd = parse_ssd(gi.ssd_text);
        Observation obs = parse_observation(gi.obs_text, ssd);
        std::string tag = "seed " + std::to_string(seed) + ": ";

        CompileResult compiled = checked_compile(ssd, obs);
        o.expect(is_decomposable(compiled.consequence), tag + "not decomposable");

        auto models = sorted_models(ssd, compiled.consequence);
        auto diagnoses = brute_diagnoses(ssd, obs);
        o.expect(models == diagnoses, tag + "models differ from brute-force diagnoses");

        CostFunction card = make_cardinality(ssd);
        CostFunction kappa;
        kappa.name = "kappa";
        kappa.costs.resize(static_cast<size_t>(ssd.vars.size()));
        Rng rng(seed * 77 + 13);
        for (VarId a : ssd.assumables) {
            auto& row = kappa.costs[static_cast<size_t>(a)];
            row.assign(static_cast<size_t>(ssd.vars[a].size()), 0);
            for (int v = 0; v < ssd.vars[a].size(); ++v)
                if (v != ssd.vars[a].healthy) row[static_cast<size_t>(v)] =
                    static_cast<Cost>(rng.below(4));
        }
        for (const CostFunction& cf : {card, kappa}) {
            DiagnosisResult mine = minimal_diagnoses(ssd, compiled.consequence, cf);
            BruteMinimalResult brute = brute_minimal(ssd, obs, cf);
            o.expect(mine.status == brute.status && mine.cost == brute.cost &&
                         mine.diagnoses == brute.diagnoses,
                     tag + "minimal diagnoses differ under " + cf.name);
        }

        VarSet a_vars = ssd.assumable_set();
        auto kernels = prime_implicants(diagnoses, a_vars, ssd.vars);
        auto conflicts = prime_implicates(diagnoses, a_vars, ssd.vars);
        std::set<Instantiation> model_set(diagnoses.begin(), diagnoses.end());
        AssignmentEnv env(ssd.vars);
        for (const auto& omega : generate_instantiations(a_vars, env, ssd.vars)) {
            bool in_models = model_set.count(omega) > 0;
            bool some_kernel = false;
            for (const auto& k : kernels) {
                bool covers = true;
                for (const auto& l : k)
                    if (*omega.value_of(l.var) != l.value) {
                        covers = false;
                        break;
                    }
                if (covers) {
                    some_kernel = true;
                    break;
                }
            }
            bool all_conflicts = true;
            for (const auto& c : conflicts) {
                bool satisfied = false;
                for (const auto& l : c.lits)
                    if (*omega.value_of(l.var) == l.value) {
                        satisfied = true;
                        break;
                    }
                if (!satisfied) {
                    all_conflicts = false;
                    break;
                }
            }
            o.expect(some_kernel == in_models,
                     tag + "kernel disjunction differs from the model set");
            o.expect(all_conflicts == in_models,
                     tag + "conflict conjunction differs from the model set");
            if (!o.pass) break;
        }
    }
    return o;
}

Outcome criterion_7() {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    std::vector<int64_t> counts;
    for (int n : {8, 16, 32, 64}) {
        Ssd chain = parse_ssd(gen_chain_inverters(n).ssd_text);
        CompileResult compiled = checked_compile(chain, Observation{});
        counts.push_back(compiled.stats.nodes + compiled.stats.edges);
    }
    for (size_t i = 1; i < counts.size(); ++i) {
        double ratio = static_cast<double>(counts[i]) / static_cast<double>(counts[i - 1]);
        o.expect(ratio <= 2.2, "size ratio " + std::to_string(ratio) + " exceeds 2.2");
    }
    o.expect(seconds_since(start) < 5.0, "runtime exceeded 5 s");
    return o;
}

Outcome criterion_8() {
    Outcome o;
    o.expect(tracker.compilations > 0, "no compilations were tracked");
    o.expect(tracker.all_cache_bounds_ok,
             "some compilation exceeded a sepset cache bound");
    return o;
}

Outcome criterion_9() {
    Outcome o;
    Ssd three_gate = parse_ssd(read_file(data_path("three_gate.ssd")));
    JointreeFile file = parse_jointree(read_file(data_path("three_gate.jt")), three_gate);
    CompileOptions options;
    options.jointree = &file.jointree;
    options.assignment = &file.assignment;
    options.pivot = file.index_of_id.at(1);
    int64_t previous = -1;
    for (const char* name :
         {"three_gate_ae.obs", "three_gate_abe.obs", "three_gate_abce.obs", "three_gate_abcde.obs"}) {
        Observation obs = parse_observation(read_file(data_path(name)), three_gate);
        CompileResult result = checked_compile(three_gate, obs, options);
        if (previous >= 0)
            o.expect(result.stats.edges <= previous,
                     std::string(name) + " grew the edge count");
        previous = result.stats.edges;
    }
    return o;
}

Outcome criterion_10() {
    Outcome o;
    Ssd three_gate = parse_ssd(read_file(data_path("three_gate.ssd")));
    Observation obs = parse_observation("!A !E", three_gate);

    CutResult cut = cut_arcs(three_gate, obs);
    for (const auto& piece : cut.pieces) {
        Jointree jt = build_jointree(piece.ssd);
        o.expect(validate_jointree(piece.ssd, jt).ok(), "piece jointree invalid");
        for (auto [i, j] : jt.edges)
            o.expect(jt.sepset(i, j).size() <= 1, "piece is not tree-structured");
        // after conditioning on the residual observation the pieces have
        // effective width 1: no clique keeps more than two free variables
        VarSet observed = piece.observation.variables();
        for (const auto& clique : jt.cliques)
            o.expect(vs_diff(clique, observed).size() <= 2,
                     "piece clique keeps more than two unobserved variables");
    }

    CompileResult uncut = checked_compile(three_gate, obs);
    CutCompileResult conjoined = compile_cut(three_gate, obs);
    for (const auto& piece : conjoined.pieces) {
        ++tracker.compilations;
        if (!piece.result.stats.within_cache_bounds()) tracker.all_cache_bounds_ok = false;
    }
    o.expect(equivalent(uncut.consequence, conjoined.consequence, three_gate.assumable_set(),
                        three_gate.vars),
             "conjoined cut consequence differs from the uncut one");
    o.expect(sorted_models(three_gate, conjoined.consequence) == brute_diagnoses(three_gate, obs),
             "cut consequence differs from the oracle");

    // cutting never increases the jointree width across the random corpus
    for (uint64_t seed = 0; seed < 200; ++seed) {
        GeneratedInstance gi = gen_random_circuit(seed);
        Ssd ssd = parse_ssd(gi.ssd_text);
        Observation robs = parse_observation(gi.obs_text, ssd);
        int original = build_jointree(ssd).width();
        int widest_piece = -1;
        for (const auto& piece : cut_arcs(ssd, robs).pieces)
            widest_piece = std::max(widest_piece, build_jointree(piece.ssd).width());
        o.expect(widest_piece <= original,
                 "seed " + std::to_string(seed) + ": cutting increased the width");
        if (!o.pass) break;
    }
    return o;
}

Outcome criterion_11() {
    Outcome o;
    auto check_full_obs = [&](const Ssd& ssd, const Observation& obs, const std::string& tag) {
        CompileResult result = checked_compile(ssd, obs);
        result.consequence.for_each_reachable([&](NodeId id) {
            if (result.consequence.kind(id) == NnfKind::or_node)
                o.expect(result.consequence.children(id).size() == 1,
                         tag + ": an or-node has " +
                             std::to_string(result.consequence.children(id).size()) +
                             " children");
        });
    };

    Ssd three_gate = parse_ssd(read_file(data_path("three_gate.ssd")));
    check_full_obs(three_gate, parse_observation("A !B !C D !E", three_gate), "three_gate consistent");
    check_full_obs(three_gate, parse_observation("A !B C D E", three_gate), "three_gate faulty");

    for (uint64_t seed = 0; seed < 50; ++seed) {
        Ssd ssd = parse_ssd(gen_random_circuit(seed).ssd_text);
        Rng rng(seed + 7000);
        std::vector<Literal> lits;
        for (VarId v : ssd.non_assumables)
            lits.push_back({v, static_cast<int32_t>(rng.below(
                                   static_cast<uint64_t>(ssd.vars[v].size())))});
        Observation full{Instantiation::of(std::move(lits))};
        check_full_obs(ssd, full, "seed " + std::to_string(seed));
        if (!o.pass) break;
    }
    return o;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* summary;
        Outcome (*body)();
    };
    const Entry entries[] = {
        {1, "two-gate scenario: consequence and oracle agree", criterion_1},
        {2, "or-gate consequence table reproduces all 8 entries", criterion_2},
        {3, "supplied jointree and pivot give the expected consequence", criterion_3},
        {4, "cardinality extraction finds the two cost-1 diagnoses", criterion_4},
        {5, "3-bit adder scenarios match the oracle", criterion_5},
        {6, "200 random circuits: models, minima, and prime forms agree", criterion_6},
        {7, "inverter chains compile with linear growth", criterion_7},
        {8, "sepset cache counters stay within their bounds", criterion_8},
        {9, "stronger observations never grow the consequence", criterion_9},
        {10, "arc cutting yields equivalent tree-structured pieces", criterion_10},
        {11, "full observations leave single-child or-nodes", criterion_11},
    };

    // criterion 8 aggregates the cache counters of every other compilation,
    // so it executes last but prints in position
    std::vector<std::pair<Outcome, double>> results(std::size(entries));
    auto run_one = [&](size_t i) {
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = entries[i].body();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        results[i] = {outcome, seconds_since(start)};
    };
    size_t aggregate = 7;  // index of criterion 8
    for (size_t i = 0; i < std::size(entries); ++i)
        if (i != aggregate) run_one(i);
    run_one(aggregate);

    int failures = 0;
    for (size_t i = 0; i < std::size(entries); ++i) {
        const auto& [outcome, elapsed] = results[i];
        std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion "
                  << entries[i].id << ": " << entries[i].summary;
        std::printf(" (%.2f s)\n", elapsed);
        if (!outcome.pass) {
            std::cout << "       " << outcome.detail << "\n";
            ++failures;
        }
    }
    if (failures == 0)
        std::cout << "all 11 acceptance criteria passed\n";
    else
        std::cout << failures << " of 11 acceptance criteria failed\n";
    return failures == 0 ? 0 : 1;
}
