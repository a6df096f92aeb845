#pragma once

// Cost functions over assumable literals. Costs are non-negative integers
// with ordinary addition, which models the required axioms (commutative,
// associative, zero element, totally ordered, no negative costs). Both
// built-in criteria are integer valued: cardinality charges 1 for every
// non-healthy value, kappa ranks come from a file.

#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ndiag/logic.hpp"
#include "ndiag/ssd.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

using Cost = int64_t;
inline constexpr Cost infinite_cost = std::numeric_limits<Cost>::max();

// Shared by the extraction and the brute-force oracle: an unsatisfiable
// consequence has no diagnoses at all.
enum class DiagnosisStatus { ok, no_diagnosis };

inline Cost cost_add(Cost a, Cost b) {
    if (a == infinite_cost || b == infinite_cost) return infinite_cost;
    return a + b;
}

struct CostFunction {
    std::string name;
    // per variable id, per value index; rows for non-assumables stay empty
    std::vector<std::vector<Cost>> costs;

    Cost of(const Literal& lit) const {
        const auto& row = costs.at(static_cast<size_t>(lit.var));
        if (row.empty()) return 0;
        return row.at(static_cast<size_t>(lit.value));
    }

    Cost of(const Instantiation& inst) const {
        Cost total = 0;
        for (const auto& l : inst) total = cost_add(total, of(l));
        return total;
    }

    std::vector<int> zero_cost_values(VarId var, const VarTable& table) const {
        std::vector<int> out;
        for (int v = 0; v < table[var].size(); ++v)
            if (of(Literal{var, v}) == 0) out.push_back(v);
        return out;
    }
};

// Every non-healthy value of an assumable costs 1, the healthy value 0.
inline CostFunction make_cardinality(const Ssd& ssd) {
    CostFunction cf;
    cf.name = "cardinality";
    cf.costs.resize(static_cast<size_t>(ssd.vars.size()));
    for (VarId a : ssd.assumables) {
        const Variable& v = ssd.vars[a];
        cf.costs[static_cast<size_t>(a)].assign(static_cast<size_t>(v.size()), 1);
        cf.costs[static_cast<size_t>(a)][static_cast<size_t>(v.healthy)] = 0;
    }
    return cf;
}

// Ranks file: one literal and one non-negative integer per line; unlisted
// literals default to 0.
inline CostFunction parse_kappa_ranks(const std::string& text, const Ssd& ssd) {
    CostFunction cf;
    cf.name = "kappa";
    cf.costs.resize(static_cast<size_t>(ssd.vars.size()));
    for (VarId a : ssd.assumables)
        cf.costs[static_cast<size_t>(a)].assign(
            static_cast<size_t>(ssd.vars[a].size()), 0);
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<Literal> seen;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 2)
            throw ParseError("expected: <literal> <integer>", line_no);
        Literal lit = parse_literal(ssd.vars, tokens[0], line_no);
        if (ssd.vars[lit.var].kind != VarKind::assumable)
            throw ParseError("rank for non-assumable " + ssd.vars[lit.var].name, line_no);
        long long rank = 0;
        try {
            rank = std::stoll(tokens[1]);
        } catch (const std::exception&) {
            throw ParseError("malformed rank: " + tokens[1], line_no);
        }
        if (rank < 0) throw ParseError("negative rank for " + tokens[0], line_no);
        for (const auto& s : seen)
            if (s == lit) throw ParseError("duplicate rank for " + tokens[0], line_no);
        seen.push_back(lit);
        cf.costs[static_cast<size_t>(lit.var)][static_cast<size_t>(lit.value)] = rank;
    }
    return cf;
}

// Each assumable needs at least one zero-cost value, otherwise minimal
// diagnoses cannot be characterized by minimal partial diagnoses.
inline ValidationReport validate_cost_function(const CostFunction& cf, const Ssd& ssd) {
    ValidationReport report;
    for (VarId a : ssd.assumables) {
        bool has_zero = false;
        for (int v = 0; v < ssd.vars[a].size(); ++v) {
            Cost c = cf.of(Literal{a, v});
            if (c < 0)
                report.violations.push_back("negative cost for " +
                                            format_literal(ssd.vars, Literal{a, v}));
            if (c == 0) has_zero = true;
        }
        if (!has_zero)
            report.violations.push_back("assumable " + ssd.vars[a].name +
                                        " has no zero-cost value");
    }
    return report;
}

}  // namespace ndiag
