#pragma once

// The two compilation stages. Component consequence tables hold, for every
// instantiation of a component's ports, the strongest conclusion about its
// assumables, stored as a decomposable NNF (a DNF over one component's
// assumables). The system consequence is then assembled over a jointree by
// case analysis on clique instantiations, with results cached per directed
// edge and sepset index so the output is a DAG rather than a tree.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ndiag/jointree.hpp"
#include "ndiag/logic.hpp"
#include "ndiag/nnf.hpp"
#include "ndiag/ssd.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

inline constexpr uint64_t default_compile_cap = uint64_t(1) << 20;

struct ComponentTable {
    VarId output = no_var;
    VarSet ports;                 // inputs and output, canonical order
    std::vector<NodeId> entries;  // indexed by the mixed-radix port index
};

namespace detail {

// Interns literal/true/false nodes within one output graph so that table
// entries and consequences share structure.
class NodeIntern {
public:
    explicit NodeIntern(NnfGraph& g) : g_(&g) {}

    NodeId literal(Literal lit) {
        auto it = literals_.find(lit);
        if (it != literals_.end()) return it->second;
        NodeId id = g_->literal_node(lit);
        literals_.emplace(lit, id);
        return id;
    }

    NodeId true_node() {
        if (true_ == no_node) true_ = g_->and_node();
        return true_;
    }

    NodeId false_node() {
        if (false_ == no_node) false_ = g_->or_node();
        return false_;
    }

private:
    NnfGraph* g_;
    std::map<Literal, NodeId> literals_;
    NodeId true_ = no_node;
    NodeId false_ = no_node;
};

// DNF of a conjunction of assumable clauses, by distribution. Terms with two
// values of one variable are dropped; duplicate and subsumed terms removed.
inline std::vector<std::vector<Literal>> cnf_to_dnf(const std::vector<const Clause*>& cnf) {
    std::vector<std::vector<Literal>> terms{{}};
    for (const Clause* clause : cnf) {
        std::vector<std::vector<Literal>> next;
        for (const auto& term : terms) {
            for (const auto& lit : clause->lits) {
                bool conflicting = false;
                bool present = false;
                for (const auto& existing : term) {
                    if (existing.var != lit.var) continue;
                    if (existing.value == lit.value)
                        present = true;
                    else
                        conflicting = true;
                    break;
                }
                if (conflicting) continue;
                std::vector<Literal> extended = term;
                if (!present) {
                    extended.push_back(lit);
                    std::sort(extended.begin(), extended.end());
                }
                next.push_back(std::move(extended));
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        terms = std::move(next);
    }
    // a term that is a superset of another term is redundant
    std::vector<std::vector<Literal>> kept;
    for (size_t i = 0; i < terms.size(); ++i) {
        bool subsumed = false;
        for (size_t j = 0; j < terms.size() && !subsumed; ++j) {
            if (i == j || terms[j].size() >= terms[i].size()) continue;
            subsumed = std::includes(terms[i].begin(), terms[i].end(), terms[j].begin(),
                                     terms[j].end());
        }
        if (!subsumed) kept.push_back(terms[i]);
    }
    return kept;
}

// Builds the NNF node for a DNF: false for no terms, true for the single
// empty term, a bare literal or conjunction for one term, otherwise an
// or-node over the terms.
inline NodeId dnf_node(NnfGraph& g, NodeIntern& intern,
                       const std::vector<std::vector<Literal>>& terms) {
    if (terms.empty()) return intern.false_node();
    auto term_node = [&](const std::vector<Literal>& term) {
        if (term.empty()) return intern.true_node();
        if (term.size() == 1) return intern.literal(term[0]);
        NodeId conj = g.and_node();
        for (const auto& lit : term) g.add_child(conj, intern.literal(lit));
        return conj;
    };
    if (terms.size() == 1) return term_node(terms[0]);
    NodeId disj = g.or_node();
    for (const auto& term : terms) g.add_child(disj, term_node(term));
    return disj;
}

}  // namespace detail

// Builds the consequence table of one component into `graph`. Entry l holds
// the conjunction of the assumable parts of all clauses whose non-assumable
// part is falsified by the port instantiation with index l, converted to DNF.
// A non-assumable part is falsified exactly when none of its literals is
// satisfied, which is decidable because port instantiations are total.
inline ComponentTable component_consequences(const Ssd& ssd, const ComponentDescription& cd,
                                             NnfGraph& graph, detail::NodeIntern& intern,
                                             uint64_t cap = default_compile_cap) {
    ComponentTable table;
    table.output = cd.output;
    table.ports = cd.ports();
    uint64_t count = domain_product(table.ports, ssd.vars, nullptr, cap);
    table.entries.reserve(static_cast<size_t>(count));
    AssignmentEnv env(ssd.vars);
    for (const auto& gamma : generate_instantiations(table.ports, env, ssd.vars)) {
        env.assign(gamma);
        std::vector<const Clause*> falsified;
        for (const auto& cl : cd.clauses) {
            bool satisfied = false;
            for (const auto& lit : cl.p_part.lits)
                if (env.value_of(lit.var) == lit.value) {
                    satisfied = true;
                    break;
                }
            if (!satisfied) falsified.push_back(&cl.a_part);
        }
        table.entries.push_back(
            detail::dnf_node(graph, intern, detail::cnf_to_dnf(falsified)));
        env.retract(gamma);
    }
    return table;
}

// Convenience overload building into a fresh intern.
inline ComponentTable component_consequences(const Ssd& ssd, const ComponentDescription& cd,
                                             NnfGraph& graph,
                                             uint64_t cap = default_compile_cap) {
    detail::NodeIntern intern(graph);
    return component_consequences(ssd, cd, graph, intern, cap);
}

struct EdgeCounters {
    int from = -1;  // clique indices; to == -1 is the virtual root edge
    int to = -1;
    VarSet sepset;
    uint64_t cached = 0;
    uint64_t noncached = 0;
    uint64_t bound = 0;  // domain product of the unobserved sepset variables
};

struct CompileStats {
    int64_t nodes = 0;  // reachable from the consequence root
    int64_t edges = 0;
    std::vector<EdgeCounters> edge_counters;

    bool within_cache_bounds() const {
        for (const auto& ec : edge_counters)
            if (ec.noncached > ec.bound) return false;
        return true;
    }
};

// One compilation run: one observation, one jointree, one component
// assignment, one pivot. Caches are only valid for that tuple, so a new
// observation needs a new session.
class CompilationSession {
public:
    CompilationSession(const Ssd& ssd, const Jointree& jt,
                       const ComponentAssignment& assignment, uint64_t cap = default_compile_cap)
        : ssd_(ssd), jt_(jt), env_(ssd.vars), cap_(cap) {
        adjacency_ = jt.adjacency();
        components_of_.resize(jt.cliques.size());
        for (const auto& cd : ssd.components())
            require(assignment.count(cd.output) > 0,
                    "component " + ssd.vars[cd.output].name + " is not assigned to a clique");
        for (const auto& [output, clique] : assignment) {
            require(clique >= 0 && static_cast<size_t>(clique) < jt.cliques.size(),
                    "component assignment refers to an unknown clique");
            require(vs_subset(ssd.description_of(output).ports(),
                              jt.cliques[static_cast<size_t>(clique)]),
                    "assigned clique does not contain the ports of component " +
                        ssd.vars[output].name);
            components_of_[static_cast<size_t>(clique)].push_back(output);
        }
        for (auto& list : components_of_) std::sort(list.begin(), list.end());
        detail::NodeIntern intern(graph_);
        for (const auto& cd : ssd.components())
            tables_.emplace(cd.output,
                            component_consequences(ssd, cd, graph_, intern, cap_));
        caches_.resize(jt.edges.size() * 2);
        counters_.resize(jt.edges.size() * 2);
        edge_index_.clear();
        for (size_t e = 0; e < jt.edges.size(); ++e) {
            auto [i, j] = jt.edges[e];
            edge_index_[{i, j}] = 2 * static_cast<int>(e);
            edge_index_[{j, i}] = 2 * static_cast<int>(e) + 1;
        }
    }

    // Runs the jointree recursion rooted at the pivot and returns the
    // consequence root. The observation is asserted once up front; the
    // generated clique instantiations automatically respect it.
    NodeId run(const Observation& obs, int pivot) {
        require(pivot >= 0 && static_cast<size_t>(pivot) < jt_.cliques.size(),
                "pivot clique index out of range");
        require(!ran_, "a compilation session runs once; create a new one");
        ran_ = true;
        for (const auto& clique : jt_.cliques) {
            AssignmentEnv probe(ssd_.vars);
            probe.assign(obs.literals);
            domain_product(clique, ssd_.vars, &probe, cap_);
        }
        observed_ = obs.variables();
        env_.assign(obs.literals);
        NodeId root = subtree_consequence(pivot, -1);
        env_.retract(obs.literals);
        graph_.set_root(root);
        return root;
    }

    const NnfGraph& graph() const { return graph_; }
    NnfGraph& graph() { return graph_; }
    const ComponentTable& table_of(VarId output) const { return tables_.at(output); }

    CompileStats stats() const {
        CompileStats s;
        if (graph_.has_root()) {
            auto size = graph_.reachable_size();
            s.nodes = size.nodes;
            s.edges = size.edges;
        }
        for (size_t e = 0; e < jt_.edges.size(); ++e) {
            for (int dir = 0; dir < 2; ++dir) {
                const EdgeCounters& ec = counters_[2 * e + static_cast<size_t>(dir)];
                if (ec.cached == 0 && ec.noncached == 0) continue;
                s.edge_counters.push_back(ec);
            }
        }
        s.edge_counters.push_back(root_counter_);
        return s;
    }

private:
    NodeId subtree_consequence(int clique, int from) {
        // sepset variables are assigned here; their index keys the cache
        VarSet sepset = from < 0 ? VarSet{} : jt_.sepset(clique, from);
        uint64_t key = index_of(sepset, env_, ssd_.vars);
        std::map<uint64_t, NodeId>* cache = nullptr;
        EdgeCounters* counter = nullptr;
        if (from >= 0) {
            int idx = edge_index_.at({clique, from});
            cache = &caches_[static_cast<size_t>(idx)];
            counter = &counters_[static_cast<size_t>(idx)];
            counter->from = clique;
            counter->to = from;
        } else {
            counter = &root_counter_;
            counter->from = clique;
        }
        if (counter->bound == 0) {
            counter->sepset = sepset;
            counter->bound = 1;
            for (VarId v : sepset)
                if (!vs_contains(observed_, v))
                    counter->bound *= static_cast<uint64_t>(ssd_.vars[v].size());
        }
        if (cache) {
            auto hit = cache->find(key);
            if (hit != cache->end()) {
                ++counter->cached;
                return hit->second;
            }
        }
        ++counter->noncached;

        NodeId disj = graph_.or_node();
        const VarSet& clique_vars = jt_.cliques[static_cast<size_t>(clique)];
        for (const auto& alpha : generate_instantiations(clique_vars, env_, ssd_.vars)) {
            env_.assign(alpha);
            NodeId conj = graph_.and_node();
            graph_.add_child(conj, clique_consequence(clique));
            for (int neighbor : adjacency_[static_cast<size_t>(clique)])
                if (neighbor != from)
                    graph_.add_child(conj, subtree_consequence(neighbor, clique));
            graph_.add_child(disj, conj);
            env_.retract(alpha);
        }
        if (cache) (*cache)[key] = disj;
        return disj;
    }

    NodeId clique_consequence(int clique) {
        NodeId conj = graph_.and_node();
        for (VarId output : components_of_[static_cast<size_t>(clique)]) {
            const ComponentTable& table = tables_.at(output);
            uint64_t index = index_of(table.ports, env_, ssd_.vars);
            graph_.add_child(conj, table.entries.at(static_cast<size_t>(index)));
        }
        return conj;
    }

    const Ssd& ssd_;
    const Jointree& jt_;
    AssignmentEnv env_;
    uint64_t cap_;
    bool ran_ = false;
    VarSet observed_;
    NnfGraph graph_;
    std::map<VarId, ComponentTable> tables_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<VarId>> components_of_;
    std::map<std::pair<int, int>, int> edge_index_;
    std::vector<std::map<uint64_t, NodeId>> caches_;
    std::vector<EdgeCounters> counters_;
    EdgeCounters root_counter_;
};

// Default pivot: the lowest-index clique of maximum size.
inline int default_pivot(const Jointree& jt) {
    int best = 0;
    for (size_t i = 1; i < jt.cliques.size(); ++i)
        if (jt.cliques[i].size() > jt.cliques[static_cast<size_t>(best)].size())
            best = static_cast<int>(i);
    return best;
}

struct CompileOptions {
    const Jointree* jointree = nullptr;              // built when absent
    const ComponentAssignment* assignment = nullptr;  // computed when absent
    int pivot = -1;                                   // default_pivot when < 0
    bool simplify_output = false;
    uint64_t cap = default_compile_cap;
};

struct CompileResult {
    NnfGraph consequence;  // root set
    Jointree jointree;
    ComponentAssignment assignment;
    int pivot = 0;
    CompileStats stats;
};

// Compiles the consequence of `obs`: an NNF over the assumables whose models
// are exactly the health assignments consistent with the description and the
// observation. The output is decomposable by construction.
inline CompileResult compile_consequence(const Ssd& ssd, const Observation& obs,
                                         const CompileOptions& options = {}) {
    CompileResult result;
    result.jointree = options.jointree ? *options.jointree : build_jointree(ssd);
    auto report = validate_jointree(ssd, result.jointree);
    require(report.ok(), "invalid jointree:\n" + report.to_string());
    result.assignment = options.assignment ? *options.assignment
                                           : assign_components(ssd, result.jointree);
    result.pivot = options.pivot >= 0 ? options.pivot : default_pivot(result.jointree);
    CompilationSession session(ssd, result.jointree, result.assignment, options.cap);
    session.run(obs, result.pivot);
    result.stats = session.stats();
    result.consequence = std::move(session.graph());
    if (options.simplify_output) {
        result.consequence = simplify(result.consequence);
        auto size = result.consequence.reachable_size();
        result.stats.nodes = size.nodes;
        result.stats.edges = size.edges;
    }
    return result;
}

// Compiles a cut-arc result piece by piece and conjoins the piece
// consequences under a fresh and-node over the shared variable table.
struct PieceReport {
    CompileResult result;
    Observation observation;
};

struct CutCompileResult {
    NnfGraph consequence;
    std::vector<PieceReport> pieces;
};

inline CutCompileResult compile_cut(const Ssd& ssd, const Observation& obs,
                                    const CompileOptions& options = {}) {
    CutResult cut = cut_arcs(ssd, obs);
    CutCompileResult out;
    NodeId conj = out.consequence.and_node();
    for (auto& piece : cut.pieces) {
        CompileOptions piece_options = options;
        piece_options.jointree = nullptr;
        piece_options.assignment = nullptr;
        piece_options.pivot = -1;
        PieceReport report{compile_consequence(piece.ssd, piece.observation, piece_options),
                           piece.observation};
        out.consequence.add_child(
            conj, copy_into(out.consequence, report.result.consequence));
        out.pieces.push_back(std::move(report));
    }
    out.consequence.set_root(conj);
    if (options.simplify_output) out.consequence = simplify(out.consequence);
    return out;
}

}  // namespace ndiag
