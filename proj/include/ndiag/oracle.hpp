#pragma once

// Brute-force ground truth at desk scale. Diagnoses straight from the
// definition (an assumable instantiation is a diagnosis when some full
// extension of it and the observation satisfies every clause), minimal
// diagnoses by filtering, and exhaustive prime implicant/implicate
// enumeration for the conflict/kernel cross-checks. Pure enumeration, no
// propagation: the point is to be trivially auditable, not fast.

#include <algorithm>
#include <string>
#include <vector>

#include "ndiag/cost.hpp"
#include "ndiag/logic.hpp"
#include "ndiag/ssd.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

inline constexpr uint64_t default_oracle_cap = uint64_t(1) << 22;

namespace detail {

// Flat clause view for fast evaluation against a value vector.
struct FlatClauses {
    // each clause is a list of (var, value); satisfied when any pair matches
    std::vector<std::vector<std::pair<VarId, int32_t>>> clauses;

    explicit FlatClauses(const Ssd& ssd) {
        for (const auto& cd : ssd.components())
            for (const auto& cl : cd.clauses) {
                std::vector<std::pair<VarId, int32_t>> flat;
                for (const auto& l : cl.p_part.lits) flat.emplace_back(l.var, l.value);
                for (const auto& l : cl.a_part.lits) flat.emplace_back(l.var, l.value);
                clauses.push_back(std::move(flat));
            }
    }

    bool satisfied(const std::vector<int32_t>& values) const {
        for (const auto& clause : clauses) {
            bool ok = false;
            for (auto [var, value] : clause)
                if (values[static_cast<size_t>(var)] == value) {
                    ok = true;
                    break;
                }
            if (!ok) return false;
        }
        return true;
    }
};

// Steps `values` through the domains of `vars` like a counter; returns false
// after the last combination.
inline bool advance(std::vector<int32_t>& values, const std::vector<VarId>& vars,
                    const VarTable& table) {
    for (VarId v : vars) {
        if (++values[static_cast<size_t>(v)] < table[v].size()) return true;
        values[static_cast<size_t>(v)] = 0;
    }
    return false;
}

}  // namespace detail

// All assumable instantiations consistent with the description plus the
// observation.
inline std::vector<Instantiation> brute_diagnoses(const Ssd& ssd, const Observation& obs,
                                                  uint64_t cap = default_oracle_cap) {
    std::vector<VarId> free_p;
    for (VarId v : ssd.non_assumables)
        if (!obs.literals.value_of(v).has_value()) free_p.push_back(v);
    uint64_t product = domain_product(make_varset(ssd.assumables), ssd.vars, nullptr, cap);
    uint64_t p_product = domain_product(make_varset(free_p), ssd.vars, nullptr, cap);
    if (product > cap / std::max<uint64_t>(p_product, 1))
        throw CapExceeded("oracle enumeration of " + std::to_string(product) + " x " +
                          std::to_string(p_product) + " assignments exceeds cap");

    detail::FlatClauses flat(ssd);
    std::vector<int32_t> values(static_cast<size_t>(ssd.vars.size()), 0);
    for (const auto& l : obs.literals) values[static_cast<size_t>(l.var)] = l.value;

    std::vector<Instantiation> diagnoses;
    std::vector<VarId> assumables = ssd.assumables;
    bool more_a = true;
    for (VarId v : assumables) values[static_cast<size_t>(v)] = 0;
    while (more_a) {
        for (VarId v : free_p) values[static_cast<size_t>(v)] = 0;
        bool consistent = false;
        bool more_p = true;
        while (more_p) {
            if (flat.satisfied(values)) {
                consistent = true;
                break;
            }
            more_p = detail::advance(values, free_p, ssd.vars);
        }
        if (consistent) {
            std::vector<Literal> lits;
            lits.reserve(assumables.size());
            for (VarId v : assumables)
                lits.push_back(Literal{v, values[static_cast<size_t>(v)]});
            diagnoses.push_back(Instantiation::of(std::move(lits)));
        }
        more_a = detail::advance(values, assumables, ssd.vars);
    }
    std::sort(diagnoses.begin(), diagnoses.end());
    return diagnoses;
}

struct BruteMinimalResult {
    DiagnosisStatus status = DiagnosisStatus::ok;
    Cost cost = 0;
    std::vector<Instantiation> diagnoses;
};

inline BruteMinimalResult brute_minimal(const Ssd& ssd, const Observation& obs,
                                        const CostFunction& cf,
                                        uint64_t cap = default_oracle_cap) {
    BruteMinimalResult result;
    auto all = brute_diagnoses(ssd, obs, cap);
    if (all.empty()) {
        result.status = DiagnosisStatus::no_diagnosis;
        result.cost = infinite_cost;
        return result;
    }
    Cost best = infinite_cost;
    for (const auto& d : all) best = std::min(best, cf.of(d));
    for (const auto& d : all)
        if (cf.of(d) == best) result.diagnoses.push_back(d);
    result.cost = best;
    return result;
}

namespace detail {

// Enumerates partial instantiations over `vars` by increasing literal count;
// calls fn for each, in a deterministic order.
template <typename Fn>
void for_each_partial_instantiation(const VarSet& vars, const VarTable& table, Fn&& fn) {
    size_t n = vars.size();
    std::vector<uint64_t> masks;
    for (uint64_t mask = 0; mask < (uint64_t(1) << n); ++mask) masks.push_back(mask);
    std::stable_sort(masks.begin(), masks.end(), [](uint64_t a, uint64_t b) {
        return __builtin_popcountll(a) < __builtin_popcountll(b);
    });
    for (uint64_t mask : masks) {
        std::vector<VarId> subset;
        for (size_t i = 0; i < n; ++i)
            if (mask & (uint64_t(1) << i)) subset.push_back(vars[i]);
        std::vector<int32_t> values(subset.size(), 0);
        bool more = true;
        while (more) {
            std::vector<Literal> lits;
            for (size_t i = 0; i < subset.size(); ++i)
                lits.push_back(Literal{subset[i], values[i]});
            fn(Instantiation::of(std::move(lits)));
            more = false;
            for (size_t i = 0; i < subset.size(); ++i) {
                if (++values[i] < table[subset[i]].size()) {
                    more = true;
                    break;
                }
                values[i] = 0;
            }
        }
    }
}

inline bool instantiation_subset(const Instantiation& a, const Instantiation& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace detail

// Prime implicants of the sentence whose models over `vars` are `models`:
// partial instantiations all of whose completions are models, minimal under
// literal-set inclusion. With kernel diagnoses in mind, `models` is the
// diagnosis set and `vars` the assumables.
inline std::vector<Instantiation> prime_implicants(const std::vector<Instantiation>& models,
                                                   const VarSet& vars,
                                                   const VarTable& table) {
    require(vars.size() <= 12, "prime implicant enumeration capped at 12 variables");
    uint64_t total = domain_product(vars, table);
    std::vector<Instantiation> primes;
    detail::for_each_partial_instantiation(vars, table, [&](const Instantiation& beta) {
        for (const auto& p : primes)
            if (detail::instantiation_subset(p, beta)) return;
        // count models agreeing with beta; beta is an implicant iff every
        // completion is a model
        uint64_t completions = total;
        for (const auto& l : beta)
            completions /= static_cast<uint64_t>(table[l.var].size());
        uint64_t matching = 0;
        for (const auto& m : models) {
            bool agrees = true;
            for (const auto& l : beta)
                if (*m.value_of(l.var) != l.value) {
                    agrees = false;
                    break;
                }
            if (agrees) ++matching;
        }
        if (matching == completions) primes.push_back(beta);
    });
    std::sort(primes.begin(), primes.end());
    return primes;
}

// Prime implicates: non-valid clauses satisfied by every model, minimal under
// literal-set inclusion. These are the minimal conflicts. Candidate clauses
// are enumerated by increasing size, so supersets of found implicates are
// skipped without being generated in bulk.
inline std::vector<Clause> prime_implicates(const std::vector<Instantiation>& models,
                                            const VarSet& vars, const VarTable& table) {
    require(vars.size() <= 12, "prime implicate enumeration capped at 12 variables");
    std::vector<Literal> universe;
    for (VarId v : vars)
        for (int value = 0; value < table[v].size(); ++value)
            universe.push_back(Literal{v, value});
    size_t n = universe.size();
    require(n <= 48, "prime implicate literal universe capped at 48 literals");

    auto satisfies = [](const Instantiation& m, const Clause& c) {
        for (const auto& l : c.lits)
            if (*m.value_of(l.var) == l.value) return true;
        return false;
    };

    std::vector<Clause> primes;
    auto consider = [&](const std::vector<size_t>& picks) {
        std::vector<Literal> lits;
        lits.reserve(picks.size());
        for (size_t i : picks) lits.push_back(universe[i]);
        Clause clause = Clause::of(std::move(lits));
        // skip valid clauses: some variable contributes every one of its values
        for (VarId v : clause.variables()) {
            int count = 0;
            for (const auto& l : clause.lits)
                if (l.var == v) ++count;
            if (count == table[v].size()) return;
        }
        for (const auto& p : primes)
            if (std::includes(clause.lits.begin(), clause.lits.end(), p.lits.begin(),
                              p.lits.end()))
                return;  // a smaller implicate is inside it
        for (const auto& m : models)
            if (!satisfies(m, clause)) return;
        primes.push_back(std::move(clause));
    };

    for (size_t size = 0; size <= n; ++size) {
        // lexicographic combinations of `size` indices out of n
        std::vector<size_t> picks(size);
        for (size_t i = 0; i < size; ++i) picks[i] = i;
        while (true) {
            consider(picks);
            if (size == 0) break;
            size_t i = size;
            while (i > 0 && picks[i - 1] == n - size + (i - 1)) --i;
            if (i == 0) break;
            ++picks[i - 1];
            for (size_t j = i; j < size; ++j) picks[j] = picks[j - 1] + 1;
        }
    }
    return primes;
}

}  // namespace ndiag
