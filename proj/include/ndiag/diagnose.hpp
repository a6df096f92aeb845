#pragma once

// Minimal-diagnosis extraction from a compiled consequence. Phase one
// propagates costs bottom-up and records, per or-node, the children that
// achieve the minimum. Phase two assembles the minimal instantiations,
// extending or-branch terms with zero-cost literals so every term mentions
// exactly the atoms of its node. Pruning is non-destructive: survivors live
// in side tables and the input graph is never modified, so one consequence
// serves several cost functions.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "ndiag/cost.hpp"
#include "ndiag/nnf.hpp"
#include "ndiag/ssd.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

struct ExtractionState {
    std::vector<Cost> cost;                        // per node id
    std::vector<std::vector<NodeId>> survivors;    // or-nodes: children at min cost
    std::vector<std::vector<Instantiation>> terms;  // filled by instantiations()
    std::vector<char> terms_done;
    uint64_t work = 0;  // term operations, for complexity smoke checks
};

// Cost propagation: literal nodes cost what the cost function says, and-nodes
// add their children, or-nodes take the minimum (infinite when empty).
inline ExtractionState prune(const NnfGraph& g, const CostFunction& cf,
                             const VarTable& table) {
    for (VarId v : g.atoms_of(g.root()))
        require(table[v].kind == VarKind::assumable,
                "extraction input mentions non-assumable " + table[v].name);
    require(is_decomposable(g), "extraction requires a decomposable graph");
    ExtractionState state;
    state.cost.assign(static_cast<size_t>(g.node_count()), infinite_cost);
    state.survivors.assign(static_cast<size_t>(g.node_count()), {});
    state.terms.assign(static_cast<size_t>(g.node_count()), {});
    state.terms_done.assign(static_cast<size_t>(g.node_count()), 0);
    g.for_each_reachable([&](NodeId id) {
        const NnfNode& n = g.node(id);
        ++state.work;
        switch (n.kind) {
            case NnfKind::literal:
                state.cost[static_cast<size_t>(id)] = cf.of(n.lit);
                break;
            case NnfKind::and_node: {
                Cost total = 0;
                for (NodeId c : n.children)
                    total = cost_add(total, state.cost[static_cast<size_t>(c)]);
                state.cost[static_cast<size_t>(id)] = total;
                break;
            }
            case NnfKind::or_node: {
                Cost best = infinite_cost;
                for (NodeId c : n.children)
                    best = std::min(best, state.cost[static_cast<size_t>(c)]);
                state.cost[static_cast<size_t>(id)] = best;
                if (best != infinite_cost)
                    for (NodeId c : n.children)
                        if (state.cost[static_cast<size_t>(c)] == best)
                            state.survivors[static_cast<size_t>(id)].push_back(c);
                break;
            }
        }
    });
    return state;
}

// Cross product of `terms` with every zero-cost literal of every variable in
// `vars`; multivalued variables with several zero-cost values fan out.
inline std::vector<Instantiation> extend(const std::vector<Instantiation>& terms,
                                         const VarSet& vars, const CostFunction& cf,
                                         const VarTable& table,
                                         uint64_t* work = nullptr) {
    std::vector<Instantiation> out = terms;
    for (VarId v : vars) {
        std::vector<int> zeros = cf.zero_cost_values(v, table);
        require_invariant(!zeros.empty(),
                          "variable " + table[v].name + " has no zero-cost value");
        std::vector<Instantiation> next;
        next.reserve(out.size() * zeros.size());
        for (const auto& term : out) {
            require(!term.value_of(v).has_value(),
                    "extend: variable " + table[v].name + " already appears in a term");
            for (int value : zeros) {
                next.push_back(term.merge_disjoint(
                    Instantiation::of({Literal{v, value}})));
                if (work) ++*work;
            }
        }
        out = std::move(next);
    }
    return out;
}

namespace detail {

inline void sort_unique(std::vector<Instantiation>& terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
}

}  // namespace detail

// Fills state.terms bottom-up and returns the root's terms: the minimal
// instantiations of the consequence over its own atoms. Only the pruned
// graph is visited: all children of and-nodes, surviving children of
// or-nodes.
inline const std::vector<Instantiation>& instantiations(const NnfGraph& g,
                                                        ExtractionState& state,
                                                        const CostFunction& cf,
                                                        const VarTable& table) {
    require(state.cost.size() == static_cast<size_t>(g.node_count()),
            "extraction state does not match the graph; run prune first");
    auto surviving_children = [&](NodeId id) -> const std::vector<NodeId>& {
        if (g.kind(id) == NnfKind::or_node) return state.survivors[static_cast<size_t>(id)];
        return g.node(id).children;
    };
    std::vector<NodeId> order;
    {
        std::vector<std::pair<NodeId, size_t>> stack;
        std::vector<char> seen(static_cast<size_t>(g.node_count()), 0);
        stack.emplace_back(g.root(), 0);
        seen[static_cast<size_t>(g.root())] = 1;
        while (!stack.empty()) {
            auto& [id, pos] = stack.back();
            const auto& kids = surviving_children(id);
            if (pos < kids.size()) {
                NodeId child = kids[pos++];
                if (!seen[static_cast<size_t>(child)]) {
                    seen[static_cast<size_t>(child)] = 1;
                    stack.emplace_back(child, 0);
                }
            } else {
                order.push_back(id);
                stack.pop_back();
            }
        }
    }
    for (NodeId id : order) {
        if (state.terms_done[static_cast<size_t>(id)]) continue;
        state.terms_done[static_cast<size_t>(id)] = 1;
        const NnfNode& n = g.node(id);
        auto& slot = state.terms[static_cast<size_t>(id)];
        if (state.cost[static_cast<size_t>(id)] == infinite_cost) {
            slot.clear();
            continue;
        }
        switch (n.kind) {
            case NnfKind::literal:
                slot = {Instantiation::of({n.lit})};
                ++state.work;
                break;
            case NnfKind::and_node: {
                std::vector<Instantiation> combined{Instantiation{}};
                for (NodeId c : n.children) {
                    std::vector<Instantiation> next;
                    const auto& child_terms = state.terms[static_cast<size_t>(c)];
                    next.reserve(combined.size() * child_terms.size());
                    for (const auto& left : combined)
                        for (const auto& right : child_terms) {
                            try {
                                next.push_back(left.merge_disjoint(right));
                            } catch (const Error&) {
                                throw InvariantError(
                                    "conflicting terms combined under an and-node; "
                                    "the graph is not decomposable");
                            }
                            ++state.work;
                        }
                    combined = std::move(next);
                }
                detail::sort_unique(combined);
                slot = std::move(combined);
                break;
            }
            case NnfKind::or_node: {
                std::vector<Instantiation> merged;
                const VarSet& my_atoms = g.atoms_of(id);
                for (NodeId c : state.survivors[static_cast<size_t>(id)]) {
                    VarSet gap = vs_diff(my_atoms, g.atoms_of(c));
                    auto extended = extend(state.terms[static_cast<size_t>(c)], gap, cf,
                                           table, &state.work);
                    merged.insert(merged.end(), extended.begin(), extended.end());
                }
                detail::sort_unique(merged);
                // surviving children cannot hold more terms than their parent
                for (NodeId c : state.survivors[static_cast<size_t>(id)])
                    require_invariant(
                        state.terms[static_cast<size_t>(c)].size() <= merged.size(),
                        "term count of a surviving child exceeds its parent's");
                slot = std::move(merged);
                break;
            }
        }
    }
    return state.terms[static_cast<size_t>(g.root())];
}

struct DiagnosisResult {
    DiagnosisStatus status = DiagnosisStatus::ok;
    Cost cost = 0;
    std::vector<Instantiation> diagnoses;  // full assumable instantiations, sorted
};

// Runs both extraction phases on a compiled consequence, then extends every
// term over the assumables absent from it, so results are full assumable
// instantiations. An unsatisfiable consequence yields the no_diagnosis status.
inline DiagnosisResult minimal_diagnoses(const Ssd& ssd, const NnfGraph& compiled,
                                         const CostFunction& cf) {
    ExtractionState state = prune(compiled, cf, ssd.vars);
    DiagnosisResult result;
    if (state.cost[static_cast<size_t>(compiled.root())] == infinite_cost) {
        result.status = DiagnosisStatus::no_diagnosis;
        result.cost = infinite_cost;
        return result;
    }
    auto terms = instantiations(compiled, state, cf, ssd.vars);
    VarSet missing = vs_diff(ssd.assumable_set(), compiled.atoms_of(compiled.root()));
    result.diagnoses = extend(terms, missing, cf, ssd.vars);
    detail::sort_unique(result.diagnoses);
    result.cost = state.cost[static_cast<size_t>(compiled.root())];
    return result;
}

// Checks the per-node extraction contract: every recorded term entails its
// node, costs what the node costs, and assigns exactly the node's atoms.
// Test support; quadratic, desk scale only.
inline ValidationReport check_extraction(const NnfGraph& g, ExtractionState& state,
                                         const CostFunction& cf) {
    ValidationReport report;
    std::function<bool(NodeId, const Instantiation&)> eval =
        [&](NodeId id, const Instantiation& inst) -> bool {
        const NnfNode& n = g.node(id);
        switch (n.kind) {
            case NnfKind::literal: return *inst.value_of(n.lit.var) == n.lit.value;
            case NnfKind::and_node:
                for (NodeId c : n.children)
                    if (!eval(c, inst)) return false;
                return true;
            case NnfKind::or_node:
                for (NodeId c : n.children)
                    if (eval(c, inst)) return true;
                return false;
        }
        return false;
    };
    g.for_each_reachable([&](NodeId id) {
        if (!state.terms_done[static_cast<size_t>(id)]) return;
        for (const auto& term : state.terms[static_cast<size_t>(id)]) {
            if (term.variables() != g.atoms_of(id))
                report.violations.push_back("term does not assign exactly the atoms of node " +
                                            std::to_string(id));
            else if (!eval(id, term))
                report.violations.push_back("term does not entail node " + std::to_string(id));
            if (cf.of(term) != state.cost[static_cast<size_t>(id)])
                report.violations.push_back("term cost differs from the cost of node " +
                                            std::to_string(id));
        }
    });
    return report;
}

}  // namespace ndiag
