#pragma once

// Arena-backed rooted DAG of literal/and/or nodes. An and-node with no
// children denotes true, an or-node with no children denotes false.
// Structure sharing is expected; node identity is the arena id.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ndiag/logic.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

using NodeId = int32_t;
inline constexpr NodeId no_node = -1;

enum class NnfKind : uint8_t { literal, and_node, or_node };

struct NnfNode {
    NnfKind kind = NnfKind::and_node;
    Literal lit;                   // literal nodes only
    std::vector<NodeId> children;  // and/or nodes only
};

class NnfGraph {
public:
    NodeId literal_node(Literal lit) { return push(NnfNode{NnfKind::literal, lit, {}}); }
    NodeId and_node() { return push(NnfNode{NnfKind::and_node, {}, {}}); }
    NodeId or_node() { return push(NnfNode{NnfKind::or_node, {}, {}}); }

    void add_child(NodeId parent, NodeId child) {
        require(valid(parent) && valid(child), "add_child with invalid node id");
        require(nodes_[static_cast<size_t>(parent)].kind != NnfKind::literal,
                "literal nodes cannot have children");
        require(!reaches(child, parent), "add_child would create a cycle");
        nodes_[static_cast<size_t>(parent)].children.push_back(child);
        ++version_;
    }

    const NnfNode& node(NodeId id) const { return nodes_.at(static_cast<size_t>(id)); }
    const std::vector<NodeId>& children(NodeId id) const { return node(id).children; }
    NnfKind kind(NodeId id) const { return node(id).kind; }

    bool is_true(NodeId id) const {
        return kind(id) == NnfKind::and_node && node(id).children.empty();
    }
    bool is_false(NodeId id) const {
        return kind(id) == NnfKind::or_node && node(id).children.empty();
    }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    uint64_t version() const { return version_; }

    NodeId root() const {
        require(root_ != no_node, "graph has no root");
        return root_;
    }
    bool has_root() const { return root_ != no_node; }
    void set_root(NodeId id) {
        require(valid(id), "set_root with invalid node id");
        root_ = id;
        ++version_;
    }

    // Variables of all literal descendants, memoized per graph version.
    const VarSet& atoms_of(NodeId id) const {
        require(valid(id), "atoms_of with invalid node id");
        if (atoms_version_ != version_ || atoms_.size() != nodes_.size()) rebuild_atoms();
        return atoms_[static_cast<size_t>(id)];
    }

    struct Size {
        int64_t nodes = 0;
        int64_t edges = 0;
    };

    // Counts over the subgraph reachable from the root.
    Size reachable_size() const {
        Size size;
        for_each_reachable([&](NodeId id) {
            ++size.nodes;
            size.edges += static_cast<int64_t>(node(id).children.size());
        });
        return size;
    }

    // Applies fn to every node reachable from the root, children before
    // parents, each node once, in a deterministic order.
    void for_each_reachable(const std::function<void(NodeId)>& fn) const {
        if (root_ == no_node) return;
        std::vector<char> seen(nodes_.size(), 0);
        // explicit stack: (node, next child position)
        std::vector<std::pair<NodeId, size_t>> stack;
        stack.emplace_back(root_, 0);
        seen[static_cast<size_t>(root_)] = 1;
        while (!stack.empty()) {
            auto& [id, pos] = stack.back();
            const auto& kids = node(id).children;
            if (pos < kids.size()) {
                NodeId child = kids[pos++];
                if (!seen[static_cast<size_t>(child)]) {
                    seen[static_cast<size_t>(child)] = 1;
                    stack.emplace_back(child, 0);
                }
            } else {
                fn(id);
                stack.pop_back();
            }
        }
    }

private:
    NodeId push(NnfNode n) {
        nodes_.push_back(std::move(n));
        ++version_;
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    bool valid(NodeId id) const {
        return id >= 0 && static_cast<size_t>(id) < nodes_.size();
    }

    bool reaches(NodeId from, NodeId target) const {
        if (from == target) return true;
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<NodeId> stack{from};
        seen[static_cast<size_t>(from)] = 1;
        while (!stack.empty()) {
            NodeId id = stack.back();
            stack.pop_back();
            for (NodeId child : node(id).children) {
                if (child == target) return true;
                if (!seen[static_cast<size_t>(child)]) {
                    seen[static_cast<size_t>(child)] = 1;
                    stack.push_back(child);
                }
            }
        }
        return false;
    }

    void rebuild_atoms() const {
        atoms_.assign(nodes_.size(), {});
        // ids only ever gain children pointing at existing nodes, so a plain
        // bottom-up pass per node with an explicit stack is enough
        std::vector<char> done(nodes_.size(), 0);
        for (size_t start = 0; start < nodes_.size(); ++start) {
            if (done[start]) continue;
            std::vector<std::pair<NodeId, size_t>> stack;
            stack.emplace_back(static_cast<NodeId>(start), 0);
            while (!stack.empty()) {
                auto& [id, pos] = stack.back();
                if (done[static_cast<size_t>(id)]) {
                    stack.pop_back();
                    continue;
                }
                const NnfNode& n = nodes_[static_cast<size_t>(id)];
                if (n.kind == NnfKind::literal) {
                    atoms_[static_cast<size_t>(id)] = {n.lit.var};
                    done[static_cast<size_t>(id)] = 1;
                    stack.pop_back();
                    continue;
                }
                if (pos < n.children.size()) {
                    NodeId child = n.children[pos++];
                    if (!done[static_cast<size_t>(child)]) stack.emplace_back(child, 0);
                    continue;
                }
                VarSet atoms;
                for (NodeId child : n.children)
                    atoms = vs_union(atoms, atoms_[static_cast<size_t>(child)]);
                atoms_[static_cast<size_t>(id)] = std::move(atoms);
                done[static_cast<size_t>(id)] = 1;
                stack.pop_back();
            }
        }
        atoms_version_ = version_;
    }

    std::vector<NnfNode> nodes_;
    NodeId root_ = no_node;
    uint64_t version_ = 0;
    mutable std::vector<VarSet> atoms_;
    mutable uint64_t atoms_version_ = ~uint64_t(0);
};

// True iff for every and-node reachable from the root, the atom sets of its
// children are pairwise disjoint.
inline bool is_decomposable(const NnfGraph& g) {
    bool ok = true;
    g.for_each_reachable([&](NodeId id) {
        if (!ok || g.kind(id) != NnfKind::and_node) return;
        const auto& kids = g.children(id);
        size_t total = 0;
        VarSet all;
        for (NodeId child : kids) {
            const VarSet& atoms = g.atoms_of(child);
            total += atoms.size();
            all = vs_union(all, atoms);
        }
        if (all.size() != total) ok = false;
    });
    return ok;
}

// Linear-time satisfiability; sound only on decomposable graphs, hence the
// up-front check.
inline bool satisfiable(const NnfGraph& g) {
    require(is_decomposable(g), "satisfiable requires a decomposable graph");
    std::vector<char> sat(static_cast<size_t>(g.node_count()), 0);
    bool root_sat = false;
    g.for_each_reachable([&](NodeId id) {
        const NnfNode& n = g.node(id);
        bool value = false;
        switch (n.kind) {
            case NnfKind::literal: value = true; break;
            case NnfKind::and_node:
                value = true;
                for (NodeId c : n.children) value = value && sat[static_cast<size_t>(c)];
                break;
            case NnfKind::or_node:
                value = false;
                for (NodeId c : n.children) value = value || sat[static_cast<size_t>(c)];
                break;
        }
        sat[static_cast<size_t>(id)] = value ? 1 : 0;
        if (id == g.root()) root_sat = value;
    });
    return root_sat;
}

// Bottom-up Boolean evaluation; `inst` must assign every atom of the root.
inline bool evaluate(const NnfGraph& g, const Instantiation& inst) {
    for (VarId v : g.atoms_of(g.root()))
        require(inst.value_of(v).has_value(),
                "evaluate: instantiation misses variable id " + std::to_string(v));
    std::vector<char> val(static_cast<size_t>(g.node_count()), 0);
    bool root_val = false;
    g.for_each_reachable([&](NodeId id) {
        const NnfNode& n = g.node(id);
        bool value = false;
        switch (n.kind) {
            case NnfKind::literal: value = *inst.value_of(n.lit.var) == n.lit.value; break;
            case NnfKind::and_node:
                value = true;
                for (NodeId c : n.children) value = value && val[static_cast<size_t>(c)];
                break;
            case NnfKind::or_node:
                value = false;
                for (NodeId c : n.children) value = value || val[static_cast<size_t>(c)];
                break;
        }
        val[static_cast<size_t>(id)] = value ? 1 : 0;
        if (id == g.root()) root_val = value;
    });
    return root_val;
}

inline constexpr uint64_t default_model_cap = uint64_t(1) << 20;

// All instantiations of `vars` satisfying the graph. `vars` must cover the
// root's atoms and their domain product must stay within `cap`.
inline std::vector<Instantiation> enumerate_models(const NnfGraph& g, const VarSet& vars,
                                                   const VarTable& table,
                                                   uint64_t cap = default_model_cap) {
    require(vs_subset(g.atoms_of(g.root()), vars),
            "enumerate_models: vars must cover the atoms of the graph");
    uint64_t count = domain_product(vars, table, nullptr, cap);
    std::vector<Instantiation> models;
    for (uint64_t k = 0; k < count; ++k) {
        uint64_t rest = k;
        std::vector<Literal> lits;
        lits.reserve(vars.size());
        for (VarId v : vars) {
            uint64_t size = static_cast<uint64_t>(table[v].size());
            lits.push_back(Literal{v, static_cast<int32_t>(rest % size)});
            rest /= size;
        }
        Instantiation inst = Instantiation::of(std::move(lits));
        if (evaluate(g, inst)) models.push_back(std::move(inst));
    }
    return models;
}

// Model-set equality over `vars`.
inline bool equivalent(const NnfGraph& a, const NnfGraph& b, const VarSet& vars,
                       const VarTable& table, uint64_t cap = default_model_cap) {
    require(vs_subset(a.atoms_of(a.root()), vars) && vs_subset(b.atoms_of(b.root()), vars),
            "equivalent: vars must cover the atoms of both graphs");
    uint64_t count = domain_product(vars, table, nullptr, cap);
    for (uint64_t k = 0; k < count; ++k) {
        uint64_t rest = k;
        std::vector<Literal> lits;
        lits.reserve(vars.size());
        for (VarId v : vars) {
            uint64_t size = static_cast<uint64_t>(table[v].size());
            lits.push_back(Literal{v, static_cast<int32_t>(rest % size)});
            rest /= size;
        }
        Instantiation inst = Instantiation::of(std::move(lits));
        if (evaluate(a, inst) != evaluate(b, inst)) return false;
    }
    return true;
}

// Text format, one node per line, ids 0-based in line order, children
// defined before use, last line is the root:
//   nnf <node-count> <edge-count> <var-count>
//   L <var-name> <value-index>
//   A <child-count> <id>...
//   O <child-count> <id>...
inline std::string serialize_nnf(const NnfGraph& g, const VarTable& table) {
    std::vector<NodeId> order;
    std::vector<int32_t> new_id(static_cast<size_t>(g.node_count()), -1);
    int64_t edges = 0;
    VarSet vars;
    g.for_each_reachable([&](NodeId id) {
        new_id[static_cast<size_t>(id)] = static_cast<int32_t>(order.size());
        order.push_back(id);
        const NnfNode& n = g.node(id);
        edges += static_cast<int64_t>(n.children.size());
        if (n.kind == NnfKind::literal && !vs_contains(vars, n.lit.var))
            vars = vs_union(vars, {n.lit.var});
    });
    std::ostringstream out;
    out << "nnf " << order.size() << " " << edges << " " << vars.size() << "\n";
    for (NodeId id : order) {
        const NnfNode& n = g.node(id);
        switch (n.kind) {
            case NnfKind::literal:
                out << "L " << table[n.lit.var].name << " " << n.lit.value << "\n";
                break;
            case NnfKind::and_node:
            case NnfKind::or_node:
                out << (n.kind == NnfKind::and_node ? "A " : "O ") << n.children.size();
                for (NodeId child : n.children)
                    out << " " << new_id[static_cast<size_t>(child)];
                out << "\n";
                break;
        }
    }
    return out.str();
}

// Parses the text format above. Variable names resolve against `table`;
// with allow_new_vars, unknown names are added as binary variables (the
// domain grows to fit larger value indices).
inline NnfGraph parse_nnf(const std::string& text, VarTable& table,
                          bool allow_new_vars = false) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int64_t declared_nodes = -1, declared_edges = -1;
    int64_t seen_edges = 0;
    NnfGraph g;
    std::vector<NodeId> ids;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens[0] == "nnf") {
            if (declared_nodes >= 0) throw ParseError("duplicate nnf header", line_no);
            if (tokens.size() != 4) throw ParseError("malformed nnf header", line_no);
            try {
                declared_nodes = std::stoll(tokens[1]);
                declared_edges = std::stoll(tokens[2]);
            } catch (const std::exception&) {
                throw ParseError("malformed nnf header", line_no);
            }
            continue;
        }
        if (declared_nodes < 0) throw ParseError("missing nnf header", line_no);
        if (tokens[0] == "L") {
            if (tokens.size() != 3) throw ParseError("malformed literal line", line_no);
            VarId var = table.find(tokens[1]);
            int value = 0;
            try {
                value = std::stoi(tokens[2]);
            } catch (const std::exception&) {
                throw ParseError("malformed value index", line_no);
            }
            if (value < 0) throw ParseError("negative value index", line_no);
            if (var == no_var) {
                if (!allow_new_vars)
                    throw ParseError("unknown variable: " + tokens[1], line_no);
                std::vector<std::string> values;
                for (int i = 0; i <= std::max(value, 1); ++i)
                    values.push_back(std::to_string(i));
                var = table.add(tokens[1], std::move(values), VarKind::non_assumable);
            }
            if (value >= table[var].size())
                throw ParseError("value index out of range for " + tokens[1], line_no);
            ids.push_back(g.literal_node(Literal{var, value}));
        } else if (tokens[0] == "A" || tokens[0] == "O") {
            if (tokens.size() < 2) throw ParseError("malformed node line", line_no);
            int64_t child_count = 0;
            try {
                child_count = std::stoll(tokens[1]);
            } catch (const std::exception&) {
                throw ParseError("malformed child count", line_no);
            }
            if (child_count < 0 || tokens.size() != static_cast<size_t>(child_count) + 2)
                throw ParseError("child count does not match children", line_no);
            NodeId id = tokens[0] == "A" ? g.and_node() : g.or_node();
            for (int64_t i = 0; i < child_count; ++i) {
                int64_t child = 0;
                try {
                    child = std::stoll(tokens[static_cast<size_t>(i) + 2]);
                } catch (const std::exception&) {
                    throw ParseError("malformed child id", line_no);
                }
                if (child < 0 || child >= static_cast<int64_t>(ids.size()))
                    throw ParseError("child id " + std::to_string(child) +
                                         " not yet defined",
                                     line_no);
                g.add_child(id, ids[static_cast<size_t>(child)]);
                ++seen_edges;
            }
            ids.push_back(id);
        } else {
            throw ParseError("unknown node type: " + tokens[0], line_no);
        }
    }
    if (declared_nodes < 0) throw ParseError("missing nnf header", line_no);
    if (static_cast<int64_t>(ids.size()) != declared_nodes)
        throw ParseError("node count mismatch: header says " +
                             std::to_string(declared_nodes) + ", found " +
                             std::to_string(ids.size()),
                         line_no);
    if (seen_edges != declared_edges)
        throw ParseError("edge count mismatch: header says " +
                             std::to_string(declared_edges) + ", found " +
                             std::to_string(seen_edges),
                         line_no);
    if (ids.empty()) throw ParseError("empty graph", line_no);
    g.set_root(ids.back());
    return g;
}

// Structural simplification: drops true conjuncts and false disjuncts,
// collapses single-child and/or nodes, and propagates constant children.
// Returns a new graph; sharing is preserved.
inline NnfGraph simplify(const NnfGraph& g) {
    NnfGraph out;
    std::vector<NodeId> mapped(static_cast<size_t>(g.node_count()), no_node);
    NodeId true_node = no_node, false_node = no_node;
    auto get_true = [&] {
        if (true_node == no_node) true_node = out.and_node();
        return true_node;
    };
    auto get_false = [&] {
        if (false_node == no_node) false_node = out.or_node();
        return false_node;
    };
    g.for_each_reachable([&](NodeId id) {
        const NnfNode& n = g.node(id);
        NodeId result = no_node;
        if (n.kind == NnfKind::literal) {
            result = out.literal_node(n.lit);
        } else {
            bool is_and = n.kind == NnfKind::and_node;
            std::vector<NodeId> kept;
            bool constant = false;
            for (NodeId child : n.children) {
                NodeId m = mapped[static_cast<size_t>(child)];
                if (is_and && out.is_true(m)) continue;
                if (!is_and && out.is_false(m)) continue;
                if (is_and && out.is_false(m)) {
                    constant = true;
                    break;
                }
                if (!is_and && out.is_true(m)) {
                    constant = true;
                    break;
                }
                kept.push_back(m);
            }
            if (constant)
                result = is_and ? get_false() : get_true();
            else if (kept.empty())
                result = is_and ? get_true() : get_false();
            else if (kept.size() == 1)
                result = kept[0];
            else {
                result = is_and ? out.and_node() : out.or_node();
                for (NodeId child : kept) out.add_child(result, child);
            }
        }
        mapped[static_cast<size_t>(id)] = result;
    });
    out.set_root(mapped[static_cast<size_t>(g.root())]);
    return out;
}

// Copies the subgraph reachable from src's root into dst, returning the
// copied root. Sharing is preserved.
inline NodeId copy_into(NnfGraph& dst, const NnfGraph& src) {
    std::vector<NodeId> mapped(static_cast<size_t>(src.node_count()), no_node);
    src.for_each_reachable([&](NodeId id) {
        const NnfNode& n = src.node(id);
        NodeId copy = no_node;
        switch (n.kind) {
            case NnfKind::literal: copy = dst.literal_node(n.lit); break;
            case NnfKind::and_node: copy = dst.and_node(); break;
            case NnfKind::or_node: copy = dst.or_node(); break;
        }
        for (NodeId child : n.children)
            dst.add_child(copy, mapped[static_cast<size_t>(child)]);
        mapped[static_cast<size_t>(id)] = copy;
    });
    return mapped[static_cast<size_t>(src.root())];
}

}  // namespace ndiag
