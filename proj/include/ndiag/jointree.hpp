#pragma once

// Jointrees over the system structure: construction (family cliques for tree
// structures, min-fill plus maximum-weight spanning tree otherwise),
// validation of the jointree property, component assignment, and the
// width / predicted-cost statistics.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ndiag/logic.hpp"
#include "ndiag/ssd.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

struct Jointree {
    std::vector<VarSet> cliques;
    std::vector<std::pair<int, int>> edges;  // tree edges, i < j

    VarSet sepset(int i, int j) const {
        return vs_intersect(cliques.at(static_cast<size_t>(i)),
                            cliques.at(static_cast<size_t>(j)));
    }

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(cliques.size());
        for (auto [i, j] : edges) {
            adj[static_cast<size_t>(i)].push_back(j);
            adj[static_cast<size_t>(j)].push_back(i);
        }
        for (auto& n : adj) std::sort(n.begin(), n.end());
        return adj;
    }

    int width() const {
        size_t largest = 0;
        for (const auto& c : cliques) largest = std::max(largest, c.size());
        return static_cast<int>(largest) - 1;
    }
};

// Assigned clique index per component, keyed by the component's output.
using ComponentAssignment = std::map<VarId, int>;

namespace detail {

// Connects the connected components of a clique forest into one tree via
// empty-sepset edges, which the compiler handles soundly.
inline void link_components(Jointree& jt) {
    size_t n = jt.cliques.size();
    if (n == 0) return;
    std::vector<int> comp(n, -1);
    auto adj = jt.adjacency();
    int groups = 0;
    for (size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<int> stack{static_cast<int>(start)};
        comp[start] = groups;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[static_cast<size_t>(v)])
                if (comp[static_cast<size_t>(w)] < 0) {
                    comp[static_cast<size_t>(w)] = groups;
                    stack.push_back(w);
                }
        }
        ++groups;
    }
    std::vector<int> first_of(static_cast<size_t>(groups), -1);
    for (size_t i = 0; i < n; ++i)
        if (first_of[static_cast<size_t>(comp[i])] < 0)
            first_of[static_cast<size_t>(comp[i])] = static_cast<int>(i);
    for (int gi = 1; gi < groups; ++gi)
        jt.edges.emplace_back(std::min(first_of[0], first_of[static_cast<size_t>(gi)]),
                              std::max(first_of[0], first_of[static_cast<size_t>(gi)]));
    std::sort(jt.edges.begin(), jt.edges.end());
}

inline void connect_work(std::map<VarId, std::set<VarId>>& work, VarId a, VarId b) {
    if (a == b) return;
    work[a].insert(b);
    work[b].insert(a);
}

// Family-clique construction for structures whose undirected graph is acyclic:
// one clique per node's family, neighboring families connected, cliques
// contained in a neighbor absorbed. All sepsets end up singletons.
inline Jointree build_tree_jointree(const Ssd& ssd) {
    const auto& nodes = ssd.non_assumables;
    std::vector<VarSet> cliques;
    std::map<VarId, int> clique_of;
    for (VarId v : nodes) {
        clique_of[v] = static_cast<int>(cliques.size());
        cliques.push_back(vs_union(ssd.description_of(v).inputs, {v}));
    }
    std::set<std::pair<int, int>> edge_set;
    for (auto [p, c] : ssd.arcs()) {
        int i = clique_of[p], j = clique_of[c];
        edge_set.emplace(std::min(i, j), std::max(i, j));
    }

    std::vector<bool> alive(cliques.size(), true);
    std::vector<std::set<int>> adj(cliques.size());
    for (auto [i, j] : edge_set) {
        adj[static_cast<size_t>(i)].insert(j);
        adj[static_cast<size_t>(j)].insert(i);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < cliques.size() && !changed; ++i) {
            if (!alive[i]) continue;
            for (int j : adj[i]) {
                if (!vs_subset(cliques[i], cliques[static_cast<size_t>(j)])) continue;
                for (int k : adj[i])
                    if (k != j) {
                        adj[static_cast<size_t>(k)].erase(static_cast<int>(i));
                        adj[static_cast<size_t>(k)].insert(j);
                        adj[static_cast<size_t>(j)].insert(k);
                    }
                adj[static_cast<size_t>(j)].erase(static_cast<int>(i));
                alive[i] = false;
                changed = true;
                break;
            }
        }
    }

    Jointree jt;
    std::vector<int> new_index(cliques.size(), -1);
    for (size_t i = 0; i < cliques.size(); ++i)
        if (alive[i]) {
            new_index[i] = static_cast<int>(jt.cliques.size());
            jt.cliques.push_back(cliques[i]);
        }
    std::set<std::pair<int, int>> new_edges;
    for (size_t i = 0; i < cliques.size(); ++i) {
        if (!alive[i]) continue;
        for (int j : adj[i]) {
            if (!alive[static_cast<size_t>(j)]) continue;
            int a = new_index[i], b = new_index[static_cast<size_t>(j)];
            if (a != b) new_edges.emplace(std::min(a, b), std::max(a, b));
        }
    }
    jt.edges.assign(new_edges.begin(), new_edges.end());
    // link disconnected pieces with empty sepsets so the result is one tree
    link_components(jt);
    return jt;
}

// Min-fill triangulation over the moral graph, then maximal cliques and a
// maximum-weight spanning tree over sepset sizes. Ties are broken by
// variable name, then id, so the result is deterministic.
inline Jointree build_minfill_jointree(const Ssd& ssd) {
    const auto& nodes = ssd.non_assumables;
    std::map<VarId, std::set<VarId>> adjacent;
    for (VarId v : nodes) adjacent[v];
    auto connect = [&](VarId a, VarId b) {
        if (a == b) return;
        adjacent[a].insert(b);
        adjacent[b].insert(a);
    };
    for (auto [p, c] : ssd.arcs()) connect(p, c);
    for (const auto& cd : ssd.components())
        for (size_t i = 0; i < cd.inputs.size(); ++i)
            for (size_t j = i + 1; j < cd.inputs.size(); ++j)
                connect(cd.inputs[i], cd.inputs[j]);

    std::map<VarId, std::set<VarId>> work = adjacent;
    std::set<VarId> remaining(nodes.begin(), nodes.end());
    std::vector<VarSet> candidates;
    while (!remaining.empty()) {
        VarId best = no_var;
        long best_fill = -1;
        for (VarId v : remaining) {
            long fill = 0;
            const auto& nbrs = work[v];
            for (auto i = nbrs.begin(); i != nbrs.end(); ++i)
                for (auto j = std::next(i); j != nbrs.end(); ++j)
                    if (!work[*i].count(*j)) ++fill;
            if (best == no_var || fill < best_fill ||
                (fill == best_fill &&
                 (ssd.vars[v].name < ssd.vars[best].name ||
                  (ssd.vars[v].name == ssd.vars[best].name && v < best)))) {
                best = v;
                best_fill = fill;
            }
        }
        VarSet clique{best};
        for (VarId n : work[best]) clique.push_back(n);
        candidates.push_back(make_varset(std::move(clique)));
        const auto nbrs = work[best];
        for (VarId a : nbrs)
            for (VarId b : nbrs) connect_work(work, a, b);
        for (VarId n : nbrs) work[n].erase(best);
        work.erase(best);
        remaining.erase(best);
    }

    Jointree jt;
    for (size_t i = 0; i < candidates.size(); ++i) {
        bool maximal = true;
        for (size_t j = 0; j < candidates.size() && maximal; ++j) {
            if (i == j) continue;
            if (candidates[i] == candidates[j]) {
                if (j < i) maximal = false;
            } else if (vs_subset(candidates[i], candidates[j])) {
                maximal = false;
            }
        }
        if (maximal) jt.cliques.push_back(candidates[i]);
    }

    // Kruskal over all clique pairs, heaviest sepsets first
    struct WeightedEdge {
        int weight, i, j;
    };
    std::vector<WeightedEdge> wedges;
    for (size_t i = 0; i < jt.cliques.size(); ++i)
        for (size_t j = i + 1; j < jt.cliques.size(); ++j)
            wedges.push_back({static_cast<int>(vs_intersect(jt.cliques[i], jt.cliques[j]).size()),
                              static_cast<int>(i), static_cast<int>(j)});
    std::sort(wedges.begin(), wedges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<int> root(jt.cliques.size());
    for (size_t i = 0; i < root.size(); ++i) root[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int v) {
        return root[static_cast<size_t>(v)] == v
                   ? v
                   : root[static_cast<size_t>(v)] = find(root[static_cast<size_t>(v)]);
    };
    for (const auto& e : wedges) {
        if (find(e.i) == find(e.j)) continue;
        root[static_cast<size_t>(find(e.i))] = find(e.j);
        jt.edges.emplace_back(e.i, e.j);
    }
    std::sort(jt.edges.begin(), jt.edges.end());
    return jt;
}

// Undirected acyclicity of the structure (a forest qualifies).
inline bool structure_is_tree(const Ssd& ssd) {
    std::map<VarId, VarId> up;
    std::function<VarId(VarId)> find = [&](VarId v) {
        if (!up.count(v)) up[v] = v;
        return up[v] == v ? v : up[v] = find(up[v]);
    };
    for (auto [p, c] : ssd.arcs()) {
        if (find(p) == find(c)) return false;
        up[find(p)] = find(c);
    }
    return true;
}

}  // namespace detail

inline Jointree build_jointree(const Ssd& ssd) {
    if (ssd.non_assumables.empty()) {
        Jointree jt;
        jt.cliques.push_back({});
        return jt;
    }
    return detail::structure_is_tree(ssd) ? detail::build_tree_jointree(ssd)
                                          : detail::build_minfill_jointree(ssd);
}

// Checks tree-ness, port coverage for every component, and the jointree
// property (every variable's cliques induce a connected subtree).
inline ValidationReport validate_jointree(const Ssd& ssd, const Jointree& jt) {
    ValidationReport report;
    size_t n = jt.cliques.size();
    if (n == 0) {
        report.violations.push_back("jointree has no cliques");
        return report;
    }
    for (const auto& clique : jt.cliques)
        for (VarId v : clique)
            if (v < 0 || v >= ssd.vars.size() ||
                ssd.vars[v].kind != VarKind::non_assumable)
                report.violations.push_back("clique mentions a non-structure variable");
    for (auto [i, j] : jt.edges)
        if (i < 0 || j < 0 || static_cast<size_t>(i) >= n || static_cast<size_t>(j) >= n ||
            i == j) {
            report.violations.push_back("edge endpoints out of range");
            return report;
        }
    if (jt.edges.size() != n - 1) {
        report.violations.push_back("edge count " + std::to_string(jt.edges.size()) +
                                    " does not match a tree over " + std::to_string(n) +
                                    " cliques");
        return report;
    }
    // connectivity (with n-1 edges this also rules out cycles)
    auto adj = jt.adjacency();
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    size_t reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<size_t>(v)])
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = true;
                ++reached;
                stack.push_back(w);
            }
    }
    if (reached != n) {
        report.violations.push_back("jointree is not connected");
        return report;
    }
    for (const auto& cd : ssd.components()) {
        VarSet ports = cd.ports();
        bool covered = false;
        for (const auto& clique : jt.cliques)
            if (vs_subset(ports, clique)) {
                covered = true;
                break;
            }
        if (!covered)
            report.violations.push_back("no clique covers the ports of component " +
                                        ssd.vars[cd.output].name);
    }
    for (VarId v : ssd.non_assumables) {
        std::vector<int> holders;
        for (size_t i = 0; i < n; ++i)
            if (vs_contains(jt.cliques[i], v)) holders.push_back(static_cast<int>(i));
        if (holders.empty()) continue;
        std::set<int> holder_set(holders.begin(), holders.end());
        std::set<int> visited{holders[0]};
        std::vector<int> frontier{holders[0]};
        while (!frontier.empty()) {
            int c = frontier.back();
            frontier.pop_back();
            for (int w : adj[static_cast<size_t>(c)])
                if (holder_set.count(w) && !visited.count(w)) {
                    visited.insert(w);
                    frontier.push_back(w);
                }
        }
        if (visited.size() != holders.size())
            report.violations.push_back("jointree property fails for variable " +
                                        ssd.vars[v].name +
                                        ": its cliques are not connected");
    }
    return report;
}

// Each component goes to the smallest clique containing its ports, ties to
// the lowest clique index.
inline ComponentAssignment assign_components(const Ssd& ssd, const Jointree& jt) {
    ComponentAssignment assignment;
    for (const auto& cd : ssd.components()) {
        VarSet ports = cd.ports();
        int best = -1;
        for (size_t i = 0; i < jt.cliques.size(); ++i) {
            if (!vs_subset(ports, jt.cliques[i])) continue;
            if (best < 0 ||
                jt.cliques[i].size() < jt.cliques[static_cast<size_t>(best)].size())
                best = static_cast<int>(i);
        }
        require(best >= 0, "no clique covers the ports of component " +
                               ssd.vars[cd.output].name + " (invalid jointree)");
        assignment[cd.output] = best;
    }
    return assignment;
}

struct JointreeStats {
    int width = 0;
    uint64_t predicted_cost = 0;
};

// width = max clique size - 1; predicted cost sums |C| times the domain
// product of each clique's unobserved variables.
inline JointreeStats stats(const Jointree& jt, const VarSet& observed,
                           const VarTable& table) {
    JointreeStats s;
    s.width = jt.width();
    for (const auto& clique : jt.cliques) {
        uint64_t product = 1;
        for (VarId v : clique)
            if (!vs_contains(observed, v)) product *= static_cast<uint64_t>(table[v].size());
        s.predicted_cost += static_cast<uint64_t>(clique.size()) * product;
    }
    return s;
}

// --- file format -------------------------------------------------------------
//
//   clique <id> <var>...
//   edge <id> <id>
//   assign <component-output> <clique-id>     (optional)
//
// Ids may be arbitrary distinct non-negative integers; they are mapped to
// dense indices in ascending order.

struct JointreeFile {
    Jointree jointree;
    ComponentAssignment assignment;  // empty when no assign lines were given
    std::map<int, int> index_of_id;  // file id -> clique index
};

inline JointreeFile parse_jointree(const std::string& text, const Ssd& ssd) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::map<int, VarSet> cliques_by_id;
    std::vector<std::pair<int, int>> raw_edges;
    std::vector<std::tuple<std::string, int, int>> raw_assigns;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        auto parse_id = [&](const std::string& tok) {
            try {
                int id = std::stoi(tok);
                if (id < 0) throw ParseError("negative clique id", line_no);
                return id;
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception&) {
                throw ParseError("malformed clique id: " + tok, line_no);
            }
        };
        if (tokens[0] == "clique") {
            if (tokens.size() < 2) throw ParseError("missing clique id", line_no);
            int id = parse_id(tokens[1]);
            if (cliques_by_id.count(id))
                throw ParseError("duplicate clique id " + std::to_string(id), line_no);
            VarSet members;
            for (size_t i = 2; i < tokens.size(); ++i) {
                VarId v = ssd.vars.find(tokens[i]);
                if (v == no_var) throw ParseError("unknown variable: " + tokens[i], line_no);
                members.push_back(v);
            }
            cliques_by_id[id] = make_varset(std::move(members));
        } else if (tokens[0] == "edge") {
            if (tokens.size() != 3) throw ParseError("expected: edge <id> <id>", line_no);
            raw_edges.emplace_back(parse_id(tokens[1]), parse_id(tokens[2]));
        } else if (tokens[0] == "assign") {
            if (tokens.size() != 3)
                throw ParseError("expected: assign <output> <clique-id>", line_no);
            raw_assigns.emplace_back(tokens[1], parse_id(tokens[2]), line_no);
        } else {
            throw ParseError("unknown directive: " + tokens[0], line_no);
        }
    }
    JointreeFile result;
    for (const auto& [id, members] : cliques_by_id) {
        result.index_of_id[id] = static_cast<int>(result.jointree.cliques.size());
        result.jointree.cliques.push_back(members);
    }
    for (auto [a, b] : raw_edges) {
        if (!result.index_of_id.count(a) || !result.index_of_id.count(b))
            throw ParseError("edge refers to undeclared clique", 0);
        int i = result.index_of_id[a], j = result.index_of_id[b];
        result.jointree.edges.emplace_back(std::min(i, j), std::max(i, j));
    }
    std::sort(result.jointree.edges.begin(), result.jointree.edges.end());
    for (const auto& [name, id, ln] : raw_assigns) {
        VarId output = ssd.vars.find(name);
        if (output == no_var) throw ParseError("unknown component: " + name, ln);
        if (!result.index_of_id.count(id))
            throw ParseError("assign refers to undeclared clique " + std::to_string(id), ln);
        result.assignment[output] = result.index_of_id[id];
    }
    return result;
}

inline std::string serialize_jointree(const Jointree& jt, const VarTable& table,
                                      const ComponentAssignment* assignment = nullptr) {
    std::ostringstream out;
    for (size_t i = 0; i < jt.cliques.size(); ++i) {
        out << "clique " << i;
        for (VarId v : jt.cliques[i]) out << " " << table[v].name;
        out << "\n";
    }
    for (auto [i, j] : jt.edges) out << "edge " << i << " " << j << "\n";
    if (assignment)
        for (const auto& [output, clique] : *assignment)
            out << "assign " << table[output].name << " " << clique << "\n";
    return out.str();
}

}  // namespace ndiag
