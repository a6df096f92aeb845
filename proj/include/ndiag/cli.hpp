#pragma once

// Command-line frontend. Every command is a function over streams so the
// test suite can drive it without spawning processes; the binary in tools/
// is a thin wrapper. Exit codes: 0 success or agreement, 1 validation
// failure or mismatch, 2 usage error, 3 cap exceeded.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndiag/compile.hpp"
#include "ndiag/cost.hpp"
#include "ndiag/diagnose.hpp"
#include "ndiag/gen.hpp"
#include "ndiag/jointree.hpp"
#include "ndiag/nnf.hpp"
#include "ndiag/oracle.hpp"
#include "ndiag/ssd.hpp"

namespace ndiag::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_mismatch = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_cap = 3;

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw Error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out.good()) throw Error("cannot write " + path);
    out << content;
    if (!out.good()) throw Error("error while writing " + path);
}

struct CommonInputs {
    std::string ssd_path;
    std::string obs_path;
    std::string jointree_path;
    int pivot_id = -1;
    bool cut_arcs = false;
    bool simplify = false;
    uint64_t cap = default_compile_cap;
    std::string cost_spec;
};

struct LoadedProblem {
    Ssd ssd;
    Observation obs;
    std::optional<JointreeFile> jointree_file;
    int pivot = -1;  // clique index, -1 for the default
};

inline LoadedProblem load_problem(const CommonInputs& inputs, bool need_obs) {
    LoadedProblem p;
    p.ssd = parse_ssd(read_file(inputs.ssd_path));
    if (!inputs.obs_path.empty())
        p.obs = parse_observation(read_file(inputs.obs_path), p.ssd);
    else if (need_obs)
        throw Error("an observation file is required (--obs)");
    if (!inputs.jointree_path.empty()) {
        p.jointree_file = parse_jointree(read_file(inputs.jointree_path), p.ssd);
        auto report = validate_jointree(p.ssd, p.jointree_file->jointree);
        if (!report.ok()) throw Error("invalid jointree:\n" + report.to_string());
    }
    if (inputs.pivot_id >= 0) {
        if (p.jointree_file) {
            auto it = p.jointree_file->index_of_id.find(inputs.pivot_id);
            if (it == p.jointree_file->index_of_id.end())
                throw Error("pivot id " + std::to_string(inputs.pivot_id) +
                            " is not a clique of the supplied jointree");
            p.pivot = it->second;
        } else {
            p.pivot = inputs.pivot_id;
        }
    }
    return p;
}

inline CompileOptions make_options(const CommonInputs& inputs, const LoadedProblem& p) {
    CompileOptions options;
    if (p.jointree_file) {
        options.jointree = &p.jointree_file->jointree;
        if (!p.jointree_file->assignment.empty())
            options.assignment = &p.jointree_file->assignment;
    }
    options.pivot = p.pivot;
    options.simplify_output = inputs.simplify;
    options.cap = inputs.cap;
    return options;
}

inline CostFunction load_cost(const std::string& spec, const Ssd& ssd) {
    if (spec == "card" || spec == "cardinality") return make_cardinality(ssd);
    if (spec.rfind("kappa:", 0) == 0) {
        CostFunction cf = parse_kappa_ranks(read_file(spec.substr(6)), ssd);
        auto report = validate_cost_function(cf, ssd);
        if (!report.ok()) throw Error("invalid cost function:\n" + report.to_string());
        return cf;
    }
    throw CLI::ValidationError("--cost", "expected card or kappa:<ranks-file>");
}

inline std::string diagnosis_line(const Ssd& ssd, const Instantiation& inst) {
    std::string line;
    for (const auto& l : inst) {
        if (!line.empty()) line += " ";
        line += format_literal(ssd.vars, l);
    }
    return line;
}

inline void print_diagnoses(std::ostream& out, const Ssd& ssd, Cost cost,
                            const std::vector<Instantiation>& diagnoses) {
    if (cost == infinite_cost) {
        out << "cost inf\n";
        return;
    }
    out << "cost " << cost << "\n";
    std::vector<std::string> lines;
    lines.reserve(diagnoses.size());
    for (const auto& d : diagnoses) lines.push_back(diagnosis_line(ssd, d));
    std::sort(lines.begin(), lines.end());
    for (const auto& line : lines) out << line << "\n";
}

inline void print_compile_stats(std::ostream& out, const CompileStats& stats,
                                const VarTable& table, int pivot) {
    out << "nodes " << stats.nodes << "\n";
    out << "edges " << stats.edges << "\n";
    out << "pivot " << pivot << "\n";
    for (const auto& ec : stats.edge_counters) {
        if (ec.to < 0)
            out << "cache-root " << ec.from;
        else
            out << "cache-edge " << ec.from << "->" << ec.to;
        out << " sepset";
        if (ec.sepset.empty()) out << " -";
        for (VarId v : ec.sepset) out << " " << table[v].name;
        out << " bound " << ec.bound << " noncached " << ec.noncached << " cached "
            << ec.cached << "\n";
    }
}

// Compiles with or without arc cutting and returns one consequence graph.
inline NnfGraph compile_for_command(const CommonInputs& inputs, const LoadedProblem& p,
                                    std::ostream* stats_out) {
    CompileOptions options = make_options(inputs, p);
    if (inputs.cut_arcs) {
        CutCompileResult cut = compile_cut(p.ssd, p.obs, options);
        if (stats_out) {
            auto size = cut.consequence.reachable_size();
            *stats_out << "pieces " << cut.pieces.size() << "\n";
            *stats_out << "nodes " << size.nodes << "\n";
            *stats_out << "edges " << size.edges << "\n";
            for (size_t i = 0; i < cut.pieces.size(); ++i) {
                *stats_out << "piece " << i << "\n";
                print_compile_stats(*stats_out, cut.pieces[i].result.stats, p.ssd.vars,
                                    cut.pieces[i].result.pivot);
            }
        }
        return std::move(cut.consequence);
    }
    CompileResult result = compile_consequence(p.ssd, p.obs, options);
    if (stats_out)
        print_compile_stats(*stats_out, result.stats, p.ssd.vars, result.pivot);
    return std::move(result.consequence);
}

}  // namespace detail

inline int cmd_validate(const std::string& ssd_path, bool structural_only, uint64_t cap,
                        std::ostream& out) {
    Ssd ssd = parse_ssd(detail::read_file(ssd_path));
    auto report =
        validate(ssd, structural_only ? ValidateLevel::structural : ValidateLevel::full, cap);
    if (report.ok()) {
        out << "ok\n";
        return exit_ok;
    }
    out << report.to_string();
    return exit_mismatch;
}

inline int cmd_stats(const detail::CommonInputs& inputs, std::ostream& out) {
    detail::LoadedProblem p = detail::load_problem(inputs, false);
    if (!inputs.cut_arcs) {
        Jointree jt = p.jointree_file ? p.jointree_file->jointree : build_jointree(p.ssd);
        JointreeStats s = stats(jt, p.obs.variables(), p.ssd.vars);
        out << "width " << s.width << "\n";
        out << "predicted-cost " << s.predicted_cost << "\n";
        return exit_ok;
    }
    CutResult cut = cut_arcs(p.ssd, p.obs);
    int width = -1;
    uint64_t total = 0;
    for (size_t i = 0; i < cut.pieces.size(); ++i) {
        Jointree jt = build_jointree(cut.pieces[i].ssd);
        JointreeStats s =
            stats(jt, cut.pieces[i].observation.variables(), p.ssd.vars);
        out << "piece " << i << " width " << s.width << " predicted-cost "
            << s.predicted_cost << "\n";
        width = std::max(width, s.width);
        total += s.predicted_cost;
    }
    out << "pieces " << cut.pieces.size() << "\n";
    out << "width " << width << "\n";
    out << "predicted-cost " << total << "\n";
    return exit_ok;
}

inline int cmd_compile(const detail::CommonInputs& inputs, const std::string& out_path,
                       std::ostream& out) {
    detail::LoadedProblem p = detail::load_problem(inputs, true);
    std::ostringstream stats_text;
    NnfGraph consequence = detail::compile_for_command(inputs, p, &stats_text);
    std::string nnf_text = serialize_nnf(consequence, p.ssd.vars);
    if (out_path.empty()) {
        out << nnf_text;
    } else {
        detail::write_file(out_path, nnf_text);
        out << stats_text.str();
    }
    return exit_ok;
}

inline int cmd_diagnose(const detail::CommonInputs& inputs, std::ostream& out) {
    detail::LoadedProblem p = detail::load_problem(inputs, true);
    CostFunction cf = detail::load_cost(inputs.cost_spec, p.ssd);
    NnfGraph consequence = detail::compile_for_command(inputs, p, nullptr);
    DiagnosisResult result = minimal_diagnoses(p.ssd, consequence, cf);
    detail::print_diagnoses(out, p.ssd, result.cost, result.diagnoses);
    return exit_ok;
}

inline int cmd_oracle(const detail::CommonInputs& inputs, std::ostream& out) {
    detail::LoadedProblem p = detail::load_problem(inputs, true);
    if (inputs.cost_spec.empty()) {
        auto diagnoses = brute_diagnoses(p.ssd, p.obs, inputs.cap);
        std::vector<std::string> lines;
        for (const auto& d : diagnoses) lines.push_back(detail::diagnosis_line(p.ssd, d));
        std::sort(lines.begin(), lines.end());
        for (const auto& line : lines) out << line << "\n";
        return exit_ok;
    }
    CostFunction cf = detail::load_cost(inputs.cost_spec, p.ssd);
    BruteMinimalResult result = brute_minimal(p.ssd, p.obs, cf, inputs.cap);
    detail::print_diagnoses(out, p.ssd, result.cost, result.diagnoses);
    return exit_ok;
}

inline int cmd_check(const detail::CommonInputs& inputs, std::ostream& out) {
    detail::LoadedProblem p = detail::load_problem(inputs, true);
    CostFunction cf = detail::load_cost(inputs.cost_spec, p.ssd);
    CompileOptions options = detail::make_options(inputs, p);
    CompileResult compiled = compile_consequence(p.ssd, p.obs, options);
    bool all_ok = true;
    auto line = [&](const char* name, bool ok) {
        out << name << (ok ? " ok" : " FAIL") << "\n";
        all_ok = all_ok && ok;
    };

    auto models = enumerate_models(compiled.consequence, p.ssd.assumable_set(), p.ssd.vars,
                                   inputs.cap);
    std::sort(models.begin(), models.end());
    auto diagnoses = brute_diagnoses(p.ssd, p.obs, inputs.cap);
    line("models-match-oracle", models == diagnoses);
    line("decomposable", is_decomposable(compiled.consequence));
    line("cache-bound", compiled.stats.within_cache_bounds());

    DiagnosisResult mine = minimal_diagnoses(p.ssd, compiled.consequence, cf);
    BruteMinimalResult brute = brute_minimal(p.ssd, p.obs, cf, inputs.cap);
    line("minimal-match-oracle", mine.status == brute.status && mine.cost == brute.cost &&
                                     mine.diagnoses == brute.diagnoses);

    if (p.ssd.assumables.size() <= 12) {
        VarSet a_vars = p.ssd.assumable_set();
        auto kernels = prime_implicants(diagnoses, a_vars, p.ssd.vars);
        auto conflicts = prime_implicates(diagnoses, a_vars, p.ssd.vars);
        std::set<Instantiation> model_set(diagnoses.begin(), diagnoses.end());
        AssignmentEnv env(p.ssd.vars);
        bool agree = true;
        for (const auto& omega : generate_instantiations(a_vars, env, p.ssd.vars)) {
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
            agree = agree && (some_kernel == in_models) && (all_conflicts == in_models);
        }
        line("prime-forms", agree);
    } else {
        out << "prime-forms skipped (more than 12 assumables)\n";
    }
    return all_ok ? exit_ok : exit_mismatch;
}

inline int cmd_gen(const std::string& kind, int n, uint64_t seed, const std::string& obs_kind,
                   const std::string& out_prefix) {
    GeneratedInstance instance;
    if (kind == "chain-inverters") {
        instance = gen_chain_inverters(n);
    } else if (kind == "adder") {
        AdderObservation obs = AdderObservation::none;
        if (obs_kind == "first-sum-high") obs = AdderObservation::first_sum_high;
        else if (obs_kind == "all-sums-high") obs = AdderObservation::all_sums_high;
        else if (!obs_kind.empty() && obs_kind != "none")
            throw CLI::ValidationError("--obs-kind", "adder accepts first-sum-high, all-sums-high or none");
        instance = gen_adder(n, obs);
    } else if (kind == "random") {
        RandomCircuitParams params;
        params.with_observation = obs_kind != "none";
        instance = gen_random_circuit(seed, params);
    } else {
        throw CLI::ValidationError("kind", "expected chain-inverters, adder or random");
    }
    detail::write_file(out_prefix + ".ssd", instance.ssd_text);
    detail::write_file(out_prefix + ".obs", instance.obs_text);
    return exit_ok;
}

// Parses and dispatches; never throws.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"compile system descriptions to decomposable NNF and extract"
                 " cost-minimal diagnoses"};
    app.require_subcommand(1);

    detail::CommonInputs inputs;
    bool structural_only = false;
    std::string out_path;
    std::string gen_kind, gen_prefix, gen_obs_kind;
    int gen_n = 3;
    uint64_t gen_seed = 0;

    auto add_common = [&](CLI::App* cmd, bool with_obs, bool with_compile_flags) {
        cmd->add_option("ssd", inputs.ssd_path, "system description file")->required();
        cmd->add_option("--cap", inputs.cap, "enumeration cap");
        if (with_obs) cmd->add_option("--obs", inputs.obs_path, "observation file");
        if (with_compile_flags) {
            cmd->add_option("--jointree", inputs.jointree_path, "jointree file");
            cmd->add_option("--pivot", inputs.pivot_id, "pivot clique id");
            cmd->add_flag("--cut-arcs", inputs.cut_arcs,
                          "cut outgoing arcs of observed nodes first");
            cmd->add_flag("--simplify", inputs.simplify,
                          "structurally simplify the output");
        }
    };

    CLI::App* validate_cmd = app.add_subcommand("validate", "validate a description");
    add_common(validate_cmd, false, false);
    validate_cmd->add_flag("--structural", structural_only, "skip the semantic checks");

    CLI::App* stats_cmd = app.add_subcommand("stats", "jointree width and predicted cost");
    add_common(stats_cmd, true, false);
    stats_cmd->add_option("--jointree", inputs.jointree_path, "jointree file");
    stats_cmd->add_flag("--cut-arcs", inputs.cut_arcs, "report per-piece stats");

    CLI::App* compile_cmd = app.add_subcommand("compile", "compile a consequence");
    add_common(compile_cmd, true, true);
    compile_cmd->add_option("--out", out_path, "output file for the compiled NNF");

    CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "extract minimal diagnoses");
    add_common(diagnose_cmd, true, true);
    diagnose_cmd->add_option("--cost", inputs.cost_spec, "card or kappa:<ranks-file>")
        ->required();

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "brute-force diagnoses");
    add_common(oracle_cmd, true, false);
    oracle_cmd->add_option("--cost", inputs.cost_spec, "card or kappa:<ranks-file>");

    CLI::App* check_cmd = app.add_subcommand("check", "compare compilation to brute force");
    add_common(check_cmd, true, true);
    check_cmd->add_option("--cost", inputs.cost_spec, "card or kappa:<ranks-file>")
        ->required();

    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a circuit and observation");
    gen_cmd->add_option("kind", gen_kind, "chain-inverters, adder or random")->required();
    gen_cmd->add_option("--n", gen_n, "size parameter");
    gen_cmd->add_option("--seed", gen_seed, "random seed");
    gen_cmd->add_option("--obs-kind", gen_obs_kind, "first-sum-high, all-sums-high, none or random");
    gen_cmd->add_option("--out", gen_prefix, "output prefix")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        // the oracle defaults to a larger enumeration budget than the compiler
        if (oracle_cmd->parsed() && oracle_cmd->count("--cap") == 0)
            inputs.cap = default_oracle_cap;

        if (validate_cmd->parsed())
            return cmd_validate(inputs.ssd_path, structural_only, inputs.cap, out);
        if (stats_cmd->parsed()) return cmd_stats(inputs, out);
        if (compile_cmd->parsed()) return cmd_compile(inputs, out_path, out);
        if (diagnose_cmd->parsed()) return cmd_diagnose(inputs, out);
        if (oracle_cmd->parsed()) return cmd_oracle(inputs, out);
        if (check_cmd->parsed()) return cmd_check(inputs, out);
        if (gen_cmd->parsed())
            return cmd_gen(gen_kind, gen_n, gen_seed, gen_obs_kind, gen_prefix);
        err << "no command given\n";
        return exit_usage;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_usage;
    } catch (const CapExceeded& e) {
        err << "error: " << e.what() << "\n";
        return exit_cap;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_mismatch;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_mismatch;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_mismatch;
    }
}

}  // namespace ndiag::cli
