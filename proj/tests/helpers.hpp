#pragma once

// Shared test utilities: a reference truth-table evaluator that is
// independent of the library's memoized evaluation path, an enumerator for
// full instantiations, and a generator for random decomposable graphs.

#include <map>
#include <string>
#include <vector>

#include "ndiag/logic.hpp"
#include "ndiag/nnf.hpp"
#include "ndiag/util.hpp"

namespace testutil {

using namespace ndiag;

// Plain recursive evaluation, no memoization, no reliance on for_each_reachable.
inline bool eval_reference(const NnfGraph& g, NodeId id,
                           const std::map<VarId, int>& values) {
    const NnfNode& n = g.node(id);
    switch (n.kind) {
        case NnfKind::literal: return values.at(n.lit.var) == n.lit.value;
        case NnfKind::and_node:
            for (NodeId c : n.children)
                if (!eval_reference(g, c, values)) return false;
            return true;
        case NnfKind::or_node:
            for (NodeId c : n.children)
                if (eval_reference(g, c, values)) return true;
            return false;
    }
    return false;
}

// All full assignments over `vars` as maps, by plain counting.
inline std::vector<std::map<VarId, int>> all_assignments(const VarSet& vars,
                                                         const VarTable& table) {
    std::vector<std::map<VarId, int>> out;
    std::map<VarId, int> current;
    for (VarId v : vars) current[v] = 0;
    while (true) {
        out.push_back(current);
        size_t i = 0;
        for (; i < vars.size(); ++i) {
            VarId v = vars[i];
            if (++current[v] < table[v].size()) break;
            current[v] = 0;
        }
        if (i == vars.size()) break;
    }
    return out;
}

inline Instantiation to_instantiation(const std::map<VarId, int>& values) {
    std::vector<Literal> lits;
    for (auto [var, value] : values) lits.push_back({var, value});
    return Instantiation::of(std::move(lits));
}

// Random decomposable NNF over a variable subset: and-nodes split their
// variables disjointly, or-nodes may share freely.
inline NodeId random_decomposable(NnfGraph& g, const VarSet& vars, Rng& rng,
                                  int depth = 0) {
    if (vars.empty()) return rng.chance(1, 2) ? g.and_node() : g.or_node();
    if (vars.size() == 1 || depth >= 4 || rng.chance(1, 5)) {
        VarId v = vars[rng.below(vars.size())];
        return g.literal_node({v, static_cast<int32_t>(rng.below(2))});
    }
    if (rng.chance(1, 2)) {
        // and: partition vars into two nonempty halves
        VarSet left, right;
        for (VarId v : vars) (rng.chance(1, 2) ? left : right).push_back(v);
        if (left.empty()) {
            left.push_back(right.back());
            right.pop_back();
        }
        if (right.empty()) {
            right.push_back(left.back());
            left.pop_back();
        }
        NodeId id = g.and_node();
        g.add_child(id, random_decomposable(g, left, rng, depth + 1));
        g.add_child(id, random_decomposable(g, right, rng, depth + 1));
        return id;
    }
    NodeId id = g.or_node();
    int kids = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < kids; ++i)
        g.add_child(id, random_decomposable(g, vars, rng, depth + 1));
    return id;
}

inline VarTable binary_table(int n, const std::string& prefix = "v",
                             VarKind kind = VarKind::non_assumable) {
    VarTable t;
    for (int i = 0; i < n; ++i) t.add_binary(prefix + std::to_string(i), kind);
    return t;
}

}  // namespace testutil
