#pragma once

// Structured-system-description data model: a DAG of components over the
// non-assumable variables, each with a clause set split into a non-assumable
// part and an assumable part. Includes the text parser, the validator, the
// assumable de-sharing rewrite, and the arc-cutting preprocessor.

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ndiag/logic.hpp"
#include "ndiag/util.hpp"

namespace ndiag {

// One clause of a component description, split into the projection on
// non-assumables (p_part) and the projection on assumables (a_part). The
// clause denotes the disjunction of both parts.
struct ComponentClause {
    Clause p_part;
    Clause a_part;

    friend bool operator==(const ComponentClause& a, const ComponentClause& b) {
        return a.p_part == b.p_part && a.a_part == b.a_part;
    }
};

struct ComponentDescription {
    VarId output = no_var;
    VarSet inputs;  // = parents of output in the structure
    std::vector<ComponentClause> clauses;
    VarSet assumables;  // assumables mentioned by the clauses

    VarSet ports() const { return vs_union(inputs, {output}); }

    friend bool operator==(const ComponentDescription& a, const ComponentDescription& b) {
        return a.output == b.output && a.inputs == b.inputs && a.clauses == b.clauses;
    }
};

class Ssd {
public:
    VarTable vars;
    std::vector<VarId> non_assumables;  // in declaration order
    std::vector<VarId> assumables;      // in declaration order

    void add_component(ComponentDescription cd) {
        require(vars[cd.output].kind == VarKind::non_assumable,
                "component output must be non-assumable: " + vars[cd.output].name);
        require(!vs_contains(cd.inputs, cd.output),
                "component output cannot be its own input: " + vars[cd.output].name);
        require(find_component(cd.output) < 0,
                "duplicate component: " + vars[cd.output].name);
        VarSet mentioned;
        for (const auto& cl : cd.clauses) {
            for (const auto& l : cl.p_part.lits) {
                require(vars[l.var].kind == VarKind::non_assumable,
                        "assumable on the non-assumable side of a clause of " +
                            vars[cd.output].name);
                require(l.var == cd.output || vs_contains(cd.inputs, l.var),
                        "clause of " + vars[cd.output].name + " mentions " +
                            vars[l.var].name + " which is neither its output nor an input");
            }
            for (const auto& l : cl.a_part.lits) {
                require(vars[l.var].kind == VarKind::assumable,
                        "non-assumable on the assumable side of a clause of " +
                            vars[cd.output].name);
                mentioned = vs_union(mentioned, {l.var});
            }
        }
        cd.assumables = std::move(mentioned);
        components_.push_back(std::move(cd));
        std::sort(components_.begin(), components_.end(),
                  [](const auto& a, const auto& b) { return a.output < b.output; });
    }

    const std::vector<ComponentDescription>& components() const { return components_; }

    int find_component(VarId output) const {
        for (size_t i = 0; i < components_.size(); ++i)
            if (components_[i].output == output) return static_cast<int>(i);
        return -1;
    }

    const ComponentDescription& description_of(VarId output) const {
        int i = find_component(output);
        require(i >= 0, "no component with output " + vars[output].name);
        return components_[static_cast<size_t>(i)];
    }

    // Structure arcs parent -> output, deterministic order.
    std::vector<std::pair<VarId, VarId>> arcs() const {
        std::vector<std::pair<VarId, VarId>> out;
        for (const auto& cd : components_)
            for (VarId p : cd.inputs) out.emplace_back(p, cd.output);
        return out;
    }

    VarSet assumable_set() const { return make_varset(assumables); }
    VarSet non_assumable_set() const { return make_varset(non_assumables); }

private:
    std::vector<ComponentDescription> components_;  // sorted by output id
};

struct Observation {
    Instantiation literals;  // over non-assumables only

    bool empty() const { return literals.empty(); }
    VarSet variables() const { return literals.variables(); }
};

// --- text formats ----------------------------------------------------------
//
// SSD (UTF-8, line oriented, # comments):
//   var <name> [<value-name>...]          non-assumable, default domain 0 1
//   assumable <name> [<value-name>...]    default domain 0 1
//   component <output> [: <parent>...]    declares the structure arcs
//   clause <output> : <p-literals...> | <a-literals...>
// Declaration order defines the global variable order. Non-assumables
// without a component line get an empty root description.

inline Ssd parse_ssd(const std::string& text) {
    Ssd ssd;
    struct PendingClause {
        std::string output;
        std::vector<std::string> p_tokens, a_tokens;
        int line;
    };
    std::vector<std::pair<std::vector<std::string>, int>> component_lines;
    std::vector<PendingClause> clause_lines;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        const std::string& kw = tokens[0];
        if (kw == "var" || kw == "assumable") {
            if (tokens.size() < 2) throw ParseError("missing variable name", line_no);
            std::vector<std::string> values(tokens.begin() + 2, tokens.end());
            if (values.empty()) values = {"0", "1"};
            try {
                ssd.vars.add(tokens[1], std::move(values),
                             kw == "var" ? VarKind::non_assumable : VarKind::assumable);
            } catch (const Error& e) {
                throw ParseError(e.what(), line_no);
            }
            if (kw == "var")
                ssd.non_assumables.push_back(ssd.vars.find(tokens[1]));
            else
                ssd.assumables.push_back(ssd.vars.find(tokens[1]));
        } else if (kw == "component") {
            component_lines.emplace_back(tokens, line_no);
        } else if (kw == "clause") {
            if (tokens.size() < 3 || tokens[2] != ":")
                throw ParseError("expected: clause <output> : ...", line_no);
            PendingClause pc;
            pc.output = tokens[1];
            pc.line = line_no;
            bool after_bar = false;
            for (size_t i = 3; i < tokens.size(); ++i) {
                if (tokens[i] == "|") {
                    if (after_bar) throw ParseError("duplicate '|' in clause", line_no);
                    after_bar = true;
                } else {
                    (after_bar ? pc.a_tokens : pc.p_tokens).push_back(tokens[i]);
                }
            }
            clause_lines.push_back(std::move(pc));
        } else {
            throw ParseError("unknown directive: " + kw, line_no);
        }
    }

    std::map<std::string, std::pair<ComponentDescription, int>> declared;
    for (const auto& [tokens, cl_line] : component_lines) {
        if (tokens.size() < 2) throw ParseError("missing component output", cl_line);
        const std::string& name = tokens[1];
        VarId output = ssd.vars.find(name);
        if (output == no_var) throw ParseError("unknown variable: " + name, cl_line);
        if (ssd.vars[output].kind != VarKind::non_assumable)
            throw ParseError("component output must be non-assumable: " + name, cl_line);
        if (declared.count(name)) throw ParseError("duplicate component: " + name, cl_line);
        ComponentDescription cd;
        cd.output = output;
        size_t next = 2;
        if (next < tokens.size()) {
            if (tokens[next] != ":")
                throw ParseError("expected ':' before parent list", cl_line);
            ++next;
        }
        std::vector<VarId> parents;
        for (; next < tokens.size(); ++next) {
            VarId p = ssd.vars.find(tokens[next]);
            if (p == no_var) throw ParseError("unknown variable: " + tokens[next], cl_line);
            if (ssd.vars[p].kind != VarKind::non_assumable)
                throw ParseError("parent must be non-assumable: " + tokens[next], cl_line);
            if (p == output)
                throw ParseError("component " + name + " lists itself as parent", cl_line);
            parents.push_back(p);
        }
        cd.inputs = make_varset(std::move(parents));
        declared.emplace(name, std::make_pair(std::move(cd), cl_line));
    }

    for (const auto& pc : clause_lines) {
        auto it = declared.find(pc.output);
        if (it == declared.end())
            throw ParseError("clause for undeclared component: " + pc.output, pc.line);
        ComponentDescription& cd = it->second.first;
        std::vector<Literal> p_lits, a_lits;
        for (const auto& tok : pc.p_tokens) p_lits.push_back(parse_literal(ssd.vars, tok, pc.line));
        for (const auto& tok : pc.a_tokens) a_lits.push_back(parse_literal(ssd.vars, tok, pc.line));
        for (const auto& l : p_lits)
            if (ssd.vars[l.var].kind != VarKind::non_assumable)
                throw ParseError("assumable " + ssd.vars[l.var].name +
                                     " before '|' (assumables go after it)",
                                 pc.line);
        for (const auto& l : a_lits)
            if (ssd.vars[l.var].kind != VarKind::assumable)
                throw ParseError("non-assumable " + ssd.vars[l.var].name + " after '|'",
                                 pc.line);
        cd.clauses.push_back(ComponentClause{Clause::of(std::move(p_lits)),
                                             Clause::of(std::move(a_lits))});
    }

    for (auto& [name, entry] : declared) {
        try {
            ssd.add_component(std::move(entry.first));
        } catch (const Error& e) {
            throw ParseError(e.what(), entry.second);
        }
    }
    // implicit empty root descriptions for undeclared non-assumables
    for (VarId v : ssd.non_assumables)
        if (ssd.find_component(v) < 0) {
            ComponentDescription cd;
            cd.output = v;
            ssd.add_component(std::move(cd));
        }
    return ssd;
}

inline std::string serialize_ssd(const Ssd& ssd) {
    std::ostringstream out;
    for (VarId id = 0; id < ssd.vars.size(); ++id) {
        const Variable& v = ssd.vars[id];
        out << (v.kind == VarKind::assumable ? "assumable " : "var ") << v.name;
        if (!(v.size() == 2 && v.values[0] == "0" && v.values[1] == "1"))
            for (const auto& val : v.values) out << " " << val;
        out << "\n";
    }
    for (const auto& cd : ssd.components()) {
        out << "component " << ssd.vars[cd.output].name;
        if (!cd.inputs.empty()) {
            out << " :";
            for (VarId p : cd.inputs) out << " " << ssd.vars[p].name;
        }
        out << "\n";
        for (const auto& cl : cd.clauses) {
            out << "clause " << ssd.vars[cd.output].name << " :";
            for (const auto& l : cl.p_part.lits) out << " " << format_literal(ssd.vars, l);
            out << " |";
            for (const auto& l : cl.a_part.lits) out << " " << format_literal(ssd.vars, l);
            out << "\n";
        }
    }
    return out.str();
}

// Observation file: whitespace separated literals over non-assumables.
inline Observation parse_observation(const std::string& text, const Ssd& ssd) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<Literal> lits;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        for (const auto& tok : split_ws(line)) {
            Literal l = parse_literal(ssd.vars, tok, line_no);
            if (ssd.vars[l.var].kind != VarKind::non_assumable)
                throw ParseError("assumable " + ssd.vars[l.var].name +
                                     " cannot be observed",
                                 line_no);
            lits.push_back(l);
        }
    }
    // a repeated literal is harmless; two values for one variable are not
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (size_t i = 1; i < lits.size(); ++i)
        if (lits[i].var == lits[i - 1].var)
            throw ParseError("variable " + ssd.vars[lits[i].var].name +
                                 " observed with two values",
                             0);
    return Observation{Instantiation::of(std::move(lits))};
}

// --- validation -------------------------------------------------------------

enum class ValidateLevel { structural, full };

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }

    std::string to_string() const {
        std::ostringstream out;
        for (const auto& v : violations) out << v << "\n";
        return out.str();
    }
};

namespace detail {

// Returns a cycle as a node sequence if the arcs contain one.
inline std::vector<VarId> find_cycle(const Ssd& ssd) {
    std::map<VarId, std::vector<VarId>> children;
    for (auto [p, c] : ssd.arcs()) children[p].push_back(c);
    std::map<VarId, int> state;  // 0 new, 1 on stack, 2 done
    std::vector<VarId> path;
    std::vector<VarId> cycle;
    std::function<bool(VarId)> dfs = [&](VarId v) {
        state[v] = 1;
        path.push_back(v);
        for (VarId c : children[v]) {
            if (state[c] == 1) {
                auto it = std::find(path.begin(), path.end(), c);
                cycle.assign(it, path.end());
                cycle.push_back(c);
                return true;
            }
            if (state[c] == 0 && dfs(c)) return true;
        }
        path.pop_back();
        state[v] = 2;
        return false;
    };
    for (VarId v : ssd.non_assumables)
        if (state[v] == 0 && dfs(v)) return cycle;
    return {};
}

inline std::string format_instantiation(const VarTable& table, const Instantiation& inst) {
    std::string out;
    for (const auto& l : inst) {
        if (!out.empty()) out += " ";
        out += format_literal(table, l);
    }
    return out.empty() ? "(empty)" : out;
}

inline bool clause_satisfied(const ComponentClause& cl, const AssignmentEnv& env) {
    for (const auto& l : cl.p_part.lits)
        if (env.value_of(l.var) == l.value) return true;
    for (const auto& l : cl.a_part.lits)
        if (env.value_of(l.var) == l.value) return true;
    return false;
}

}  // namespace detail

// Structural level: acyclicity and assumable disjointness. Full level
// additionally checks that every instantiation of a component's inputs and
// assumables extends to a model of its description.
inline ValidationReport validate(const Ssd& ssd, ValidateLevel level,
                                 uint64_t cap = uint64_t(1) << 20) {
    ValidationReport report;
    auto cycle = detail::find_cycle(ssd);
    if (!cycle.empty()) {
        std::string msg = "structure contains a cycle:";
        for (VarId v : cycle) msg += " " + ssd.vars[v].name;
        report.violations.push_back(msg);
    }
    for (size_t i = 0; i < ssd.components().size(); ++i)
        for (size_t j = i + 1; j < ssd.components().size(); ++j) {
            const auto& a = ssd.components()[i];
            const auto& b = ssd.components()[j];
            VarSet shared = vs_intersect(a.assumables, b.assumables);
            for (VarId s : shared)
                report.violations.push_back("shared assumable " + ssd.vars[s].name +
                                            " between components " + ssd.vars[a.output].name +
                                            " and " + ssd.vars[b.output].name);
        }
    if (level == ValidateLevel::structural || !report.ok()) return report;

    for (const auto& cd : ssd.components()) {
        VarSet given = vs_union(cd.inputs, cd.assumables);
        domain_product(vs_union(given, {cd.output}), ssd.vars, nullptr, cap);
        AssignmentEnv env(ssd.vars);
        for (const auto& inst : generate_instantiations(given, env, ssd.vars)) {
            env.assign(inst);
            bool extendable = false;
            for (int value = 0; value < ssd.vars[cd.output].size() && !extendable; ++value) {
                env.assign(Instantiation::of({Literal{cd.output, value}}));
                extendable = true;
                for (const auto& cl : cd.clauses)
                    if (!detail::clause_satisfied(cl, env)) {
                        extendable = false;
                        break;
                    }
                env.retract(Instantiation::of({Literal{cd.output, value}}));
            }
            if (!extendable)
                report.violations.push_back(
                    "component " + ssd.vars[cd.output].name +
                    " has no consistent output value under " +
                    detail::format_instantiation(ssd.vars, inst));
            env.retract(inst);
        }
    }
    return report;
}

// --- assumable de-sharing ---------------------------------------------------

// For each assumable shared by two or more components, adds an auxiliary
// non-assumable node made equivalent to it, and rewrites the sharing
// components to test the auxiliary node instead. The result satisfies the
// no-shared-assumables condition; already-unshared inputs come back unchanged.
inline Ssd deshare_assumables(const Ssd& ssd) {
    std::map<VarId, std::vector<VarId>> users;  // assumable -> component outputs
    for (const auto& cd : ssd.components())
        for (VarId a : cd.assumables) users[a].push_back(cd.output);
    VarSet shared;
    for (const auto& [a, outs] : users)
        if (outs.size() >= 2) shared.push_back(a);
    if (shared.empty()) return ssd;

    Ssd out;
    out.non_assumables = ssd.non_assumables;
    out.assumables = ssd.assumables;
    for (VarId id = 0; id < ssd.vars.size(); ++id) {
        const Variable& v = ssd.vars[id];
        out.vars.add(v.name, v.values, v.kind);
    }
    std::map<VarId, VarId> aux_of;
    for (VarId a : shared) {
        std::string name = ssd.vars[a].name + "'";
        while (out.vars.find(name) != no_var) name += "'";
        VarId aux = out.vars.add(name, ssd.vars[a].values, VarKind::non_assumable);
        out.non_assumables.push_back(aux);
        aux_of[a] = aux;
    }
    for (const auto& cd : ssd.components()) {
        ComponentDescription rewritten;
        rewritten.output = cd.output;
        VarSet extra_inputs;
        for (const auto& cl : cd.clauses) {
            std::vector<Literal> p = cl.p_part.lits;
            std::vector<Literal> a;
            for (const auto& l : cl.a_part.lits) {
                auto it = aux_of.find(l.var);
                if (it != aux_of.end()) {
                    p.push_back(Literal{it->second, l.value});
                    extra_inputs = vs_union(extra_inputs, {it->second});
                } else {
                    a.push_back(l);
                }
            }
            rewritten.clauses.push_back(
                ComponentClause{Clause::of(std::move(p)), Clause::of(std::move(a))});
        }
        rewritten.inputs = vs_union(cd.inputs, extra_inputs);
        out.add_component(std::move(rewritten));
    }
    // the auxiliary node is a root constrained to equal its assumable
    for (VarId a : shared) {
        VarId aux = aux_of[a];
        ComponentDescription cd;
        cd.output = aux;
        for (int v = 0; v < ssd.vars[a].size(); ++v) {
            std::vector<Literal> a_lits;
            for (int w = 0; w < ssd.vars[a].size(); ++w)
                if (w != v) a_lits.push_back(Literal{a, w});
            cd.clauses.push_back(ComponentClause{Clause::of({Literal{aux, v}}),
                                                 Clause::of(std::move(a_lits))});
        }
        out.add_component(std::move(cd));
    }
    return out;
}

// --- arc cutting -------------------------------------------------------------

struct CutPiece {
    Ssd ssd;  // shares the original variable table, so ids stay stable
    Observation observation;
};

struct CutResult {
    std::vector<CutPiece> pieces;
    int arcs_cut = 0;
};

// Removes the outgoing arcs of every observed node, substitutes the observed
// values into the affected descriptions, and splits the result into connected
// pieces, each with the projection of the observation onto its variables.
inline CutResult cut_arcs(const Ssd& ssd, const Observation& obs) {
    CutResult result;
    VarSet observed = obs.variables();

    std::vector<ComponentDescription> rewritten;
    for (const auto& cd : ssd.components()) {
        ComponentDescription nd;
        nd.output = cd.output;
        VarSet cut_parents = vs_intersect(cd.inputs, observed);
        nd.inputs = vs_diff(cd.inputs, cut_parents);
        result.arcs_cut += static_cast<int>(cut_parents.size());
        for (const auto& cl : cd.clauses) {
            bool satisfied = false;
            std::vector<Literal> p;
            for (const auto& l : cl.p_part.lits) {
                if (vs_contains(cut_parents, l.var)) {
                    if (*obs.literals.value_of(l.var) == l.value) {
                        satisfied = true;
                        break;
                    }
                    continue;  // falsified literal drops out
                }
                p.push_back(l);
            }
            if (satisfied) continue;
            if (p.empty() && cl.a_part.empty())
                throw Error("observation contradicts component " +
                            ssd.vars[cd.output].name + " (a clause became false)");
            nd.clauses.push_back(ComponentClause{Clause::of(std::move(p)), cl.a_part});
        }
        rewritten.push_back(std::move(nd));
    }

    // connected components of the remaining undirected structure
    std::map<VarId, VarId> parent_of;
    std::function<VarId(VarId)> find = [&](VarId v) {
        if (parent_of.find(v) == parent_of.end()) parent_of[v] = v;
        return parent_of[v] == v ? v : parent_of[v] = find(parent_of[v]);
    };
    auto unite = [&](VarId a, VarId b) { parent_of[find(a)] = find(b); };
    for (VarId v : ssd.non_assumables) find(v);
    for (const auto& cd : rewritten)
        for (VarId p : cd.inputs) unite(p, cd.output);

    std::map<VarId, std::vector<VarId>> groups;  // root -> members, id order
    for (VarId v : ssd.non_assumables) groups[find(v)].push_back(v);
    std::vector<std::vector<VarId>> ordered;
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end());
        ordered.push_back(members);
    }
    std::sort(ordered.begin(), ordered.end());

    for (const auto& members : ordered) {
        CutPiece piece;
        piece.ssd.vars = ssd.vars;
        piece.ssd.non_assumables = members;
        VarSet piece_set = make_varset(members);
        VarSet piece_assumables;
        for (const auto& cd : rewritten)
            if (vs_contains(piece_set, cd.output)) {
                piece_assumables = vs_union(piece_assumables, cd.assumables);
                ComponentDescription copy = cd;
                piece.ssd.add_component(std::move(copy));
            }
        // add_component recomputes assumables from the clauses
        VarSet mentioned;
        for (const auto& cd : piece.ssd.components())
            mentioned = vs_union(mentioned, cd.assumables);
        piece.ssd.assumables.assign(mentioned.begin(), mentioned.end());
        piece.observation = Observation{project(obs.literals, piece_set)};
        result.pieces.push_back(std::move(piece));
    }
    return result;
}

}  // namespace ndiag
