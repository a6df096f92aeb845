#pragma once

// Multivalued propositional substrate: variables, literals, instantiations,
// clauses, projection, instantiation indexing, and the mutable assignment
// environment used during compilation. Binary variables are the two-valued
// special case; there is no separate binary code path.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ndiag/util.hpp"

namespace ndiag {

using VarId = int32_t;
inline constexpr VarId no_var = -1;

enum class VarKind : uint8_t { non_assumable, assumable };

struct Variable {
    std::string name;
    std::vector<std::string> values;  // domain value names, size >= 2, distinct
    VarKind kind = VarKind::non_assumable;
    // Assumables only: index of the conventional fault-free value. It is the
    // value a cardinality cost function charges nothing for. For the default
    // binary domain {0,1} this is 1; for an explicit domain it is the first
    // listed value.
    int healthy = -1;

    int size() const { return static_cast<int>(values.size()); }
};

// Owns all variables of one system. The id of a variable is its declaration
// position, which doubles as the global canonical variable order.
class VarTable {
public:
    VarId add(std::string name, std::vector<std::string> values, VarKind kind) {
        require(!name.empty(), "variable name must not be empty");
        require(find(name) == no_var, "duplicate variable name: " + name);
        require(values.size() >= 2, "variable " + name + " needs at least 2 domain values");
        for (size_t i = 0; i < values.size(); ++i)
            for (size_t j = i + 1; j < values.size(); ++j)
                require(values[i] != values[j],
                        "variable " + name + " has duplicate domain value " + values[i]);
        Variable v;
        v.name = std::move(name);
        v.kind = kind;
        if (kind == VarKind::assumable)
            v.healthy = (values.size() == 2 && values[0] == "0" && values[1] == "1") ? 1 : 0;
        v.values = std::move(values);
        VarId id = static_cast<VarId>(vars_.size());
        by_name_.emplace(v.name, id);
        vars_.push_back(std::move(v));
        return id;
    }

    VarId add_binary(std::string name, VarKind kind) {
        return add(std::move(name), {"0", "1"}, kind);
    }

    VarId find(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? no_var : it->second;
    }

    const Variable& operator[](VarId id) const { return vars_.at(static_cast<size_t>(id)); }
    int size() const { return static_cast<int>(vars_.size()); }

    int value_index(VarId var, const std::string& value_name) const {
        const auto& vals = (*this)[var].values;
        for (size_t i = 0; i < vals.size(); ++i)
            if (vals[i] == value_name) return static_cast<int>(i);
        return -1;
    }

private:
    std::vector<Variable> vars_;
    std::unordered_map<std::string, VarId> by_name_;
};

struct Literal {
    VarId var = no_var;
    int32_t value = 0;

    friend bool operator==(const Literal& a, const Literal& b) {
        return a.var == b.var && a.value == b.value;
    }
    friend bool operator!=(const Literal& a, const Literal& b) { return !(a == b); }
    friend bool operator<(const Literal& a, const Literal& b) {
        return a.var != b.var ? a.var < b.var : a.value < b.value;
    }
};

inline Literal make_literal(const VarTable& table, VarId var, int value) {
    require(var >= 0 && var < table.size(), "literal refers to unknown variable id");
    require(value >= 0 && value < table[var].size(),
            "value index " + std::to_string(value) + " out of range for " + table[var].name);
    return Literal{var, value};
}

// Sorted set of variable ids; all set algebra below keeps vectors sorted
// and duplicate-free.
using VarSet = std::vector<VarId>;

inline VarSet make_varset(std::vector<VarId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

inline bool vs_contains(const VarSet& s, VarId v) {
    return std::binary_search(s.begin(), s.end(), v);
}

inline VarSet vs_union(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VarSet vs_intersect(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VarSet vs_diff(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline bool vs_disjoint(const VarSet& a, const VarSet& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else
            return false;
    }
    return true;
}

inline bool vs_subset(const VarSet& a, const VarSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// A partial assignment: literals in canonical variable order, at most one
// per variable. Immutable after construction.
class Instantiation {
public:
    Instantiation() = default;

    static Instantiation of(std::vector<Literal> lits) {
        std::sort(lits.begin(), lits.end());
        for (size_t i = 1; i < lits.size(); ++i)
            require(lits[i].var != lits[i - 1].var,
                    "instantiation assigns one variable twice (var id " +
                        std::to_string(lits[i].var) + ")");
        Instantiation inst;
        inst.lits_ = std::move(lits);
        return inst;
    }

    bool empty() const { return lits_.empty(); }
    size_t size() const { return lits_.size(); }
    const std::vector<Literal>& literals() const { return lits_; }
    auto begin() const { return lits_.begin(); }
    auto end() const { return lits_.end(); }

    std::optional<int> value_of(VarId var) const {
        auto it = std::lower_bound(lits_.begin(), lits_.end(), Literal{var, 0});
        if (it != lits_.end() && it->var == var) return it->value;
        return std::nullopt;
    }

    VarSet variables() const {
        VarSet out;
        out.reserve(lits_.size());
        for (const auto& l : lits_) out.push_back(l.var);
        return out;
    }

    // Union of two instantiations over disjoint variable sets.
    Instantiation merge_disjoint(const Instantiation& other) const {
        std::vector<Literal> lits = lits_;
        lits.insert(lits.end(), other.lits_.begin(), other.lits_.end());
        return of(std::move(lits));
    }

    friend bool operator==(const Instantiation& a, const Instantiation& b) {
        return a.lits_ == b.lits_;
    }
    friend bool operator<(const Instantiation& a, const Instantiation& b) {
        return a.lits_ < b.lits_;
    }

private:
    std::vector<Literal> lits_;
};

// A disjunction of literals. Duplicate (variable, value) pairs are not kept;
// distinct values of one variable may both appear.
struct Clause {
    std::vector<Literal> lits;  // sorted, unique

    static Clause of(std::vector<Literal> in) {
        std::sort(in.begin(), in.end());
        in.erase(std::unique(in.begin(), in.end()), in.end());
        return Clause{std::move(in)};
    }

    bool empty() const { return lits.empty(); }

    VarSet variables() const {
        VarSet out;
        for (const auto& l : lits) out.push_back(l.var);
        return make_varset(std::move(out));
    }

    friend bool operator==(const Clause& a, const Clause& b) { return a.lits == b.lits; }
};

inline Instantiation project(const Instantiation& inst, const VarSet& vars) {
    std::vector<Literal> kept;
    for (const auto& l : inst)
        if (vs_contains(vars, l.var)) kept.push_back(l);
    return Instantiation::of(std::move(kept));
}

inline Clause project(const Clause& clause, const VarSet& vars) {
    std::vector<Literal> kept;
    for (const auto& l : clause.lits)
        if (vs_contains(vars, l.var)) kept.push_back(l);
    return Clause::of(std::move(kept));
}

// Mutable assignment environment. Single-owner, single-threaded; assign and
// retract restore prior state exactly.
class AssignmentEnv {
public:
    explicit AssignmentEnv(const VarTable& table)
        : values_(static_cast<size_t>(table.size()), -1) {}

    bool instantiated(VarId var) const { return values_.at(static_cast<size_t>(var)) >= 0; }

    int value_of(VarId var) const {
        int v = values_.at(static_cast<size_t>(var));
        require(v >= 0, "variable id " + std::to_string(var) + " is not assigned");
        return v;
    }

    // Re-assigning an already assigned variable is an error even with the
    // same value; that keeps retract well defined.
    void assign(const Instantiation& inst) {
        for (const auto& l : inst)
            require(values_.at(static_cast<size_t>(l.var)) < 0,
                    "conflicting assign: variable id " + std::to_string(l.var) +
                        " is already assigned");
        for (const auto& l : inst) values_[static_cast<size_t>(l.var)] = l.value;
    }

    void retract(const Instantiation& inst) {
        for (const auto& l : inst)
            require(values_.at(static_cast<size_t>(l.var)) == l.value,
                    "retract of a literal that is not asserted (var id " +
                        std::to_string(l.var) + ")");
        for (const auto& l : inst) values_[static_cast<size_t>(l.var)] = -1;
    }

    size_t assigned_count() const {
        size_t n = 0;
        for (int v : values_)
            if (v >= 0) ++n;
        return n;
    }

private:
    std::vector<int32_t> values_;
};

// Mixed-radix index of the current values of `vars`, first variable least
// significant, so the binary case is value_of(head) + 2 * index(rest).
// Bijective onto [0, product of domain sizes).
inline uint64_t index_of(const std::vector<VarId>& vars, const AssignmentEnv& env,
                         const VarTable& table) {
    uint64_t index = 0;
    uint64_t mult = 1;
    for (VarId v : vars) {
        index += static_cast<uint64_t>(env.value_of(v)) * mult;
        mult *= static_cast<uint64_t>(table[v].size());
    }
    return index;
}

// Product of the domain sizes of `vars`, optionally skipping ones assigned
// in `env`. Throws CapExceeded beyond `cap`.
inline uint64_t domain_product(const std::vector<VarId>& vars, const VarTable& table,
                               const AssignmentEnv* skip_assigned_in = nullptr,
                               uint64_t cap = uint64_t(1) << 62) {
    uint64_t product = 1;
    for (VarId v : vars) {
        if (skip_assigned_in && skip_assigned_in->instantiated(v)) continue;
        product *= static_cast<uint64_t>(table[v].size());
        if (product > cap)
            throw CapExceeded("domain product exceeds cap " + std::to_string(cap));
    }
    return product;
}

// Every assignment to the unassigned variables in `vars`, in counter order:
// the first free variable varies fastest, so the k-th result has
// index_of(free vars) == k once asserted. Returns {{}} when all are assigned.
inline std::vector<Instantiation> generate_instantiations(const std::vector<VarId>& vars,
                                                          const AssignmentEnv& env,
                                                          const VarTable& table) {
    std::vector<VarId> free_vars;
    for (VarId v : vars)
        if (!env.instantiated(v)) free_vars.push_back(v);
    uint64_t count = domain_product(free_vars, table, nullptr, uint64_t(1) << 26);
    std::vector<Instantiation> out;
    out.reserve(static_cast<size_t>(count));
    for (uint64_t k = 0; k < count; ++k) {
        uint64_t rest = k;
        std::vector<Literal> lits;
        lits.reserve(free_vars.size());
        for (VarId v : free_vars) {
            uint64_t size = static_cast<uint64_t>(table[v].size());
            lits.push_back(Literal{v, static_cast<int32_t>(rest % size)});
            rest /= size;
        }
        out.push_back(Instantiation::of(std::move(lits)));
    }
    return out;
}

// Literal text syntax shared by all file formats: `name` means name=1 and
// `!name` means name=0 for binary variables; `name=value` in general.
inline std::string format_literal(const VarTable& table, const Literal& lit) {
    const Variable& v = table[lit.var];
    if (v.size() == 2 && v.values[0] == "0" && v.values[1] == "1")
        return lit.value == 1 ? v.name : "!" + v.name;
    return v.name + "=" + v.values[static_cast<size_t>(lit.value)];
}

inline Literal parse_literal(const VarTable& table, const std::string& token, int line = 0) {
    std::string name = token;
    std::string value_name;
    bool negated = false;
    if (!name.empty() && name[0] == '!') {
        negated = true;
        name = name.substr(1);
    }
    auto eq = name.find('=');
    if (eq != std::string::npos) {
        if (negated) throw ParseError("'!' cannot be combined with '=' in " + token, line);
        value_name = name.substr(eq + 1);
        name = name.substr(0, eq);
    }
    if (name.empty()) throw ParseError("malformed literal: " + token, line);
    VarId var = table.find(name);
    if (var == no_var) throw ParseError("unknown variable: " + name, line);
    if (!value_name.empty()) {
        int value = table.value_index(var, value_name);
        if (value < 0)
            throw ParseError("unknown value " + value_name + " for variable " + name, line);
        return Literal{var, value};
    }
    if (table[var].size() != 2)
        throw ParseError("variable " + name + " is multivalued; write " + name + "=<value>",
                         line);
    return Literal{var, negated ? 0 : 1};
}

}  // namespace ndiag
