#include <catch2/catch.hpp>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "ndiag/gen.hpp"
#include "ndiag/oracle.hpp"

using namespace ndiag;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string data_path(const std::string& name) {
    return std::string(NDIAG_DATA_DIR) + "/" + name;
}

Instantiation named_inst(const Ssd& ssd, const std::string& text) {
    std::vector<Literal> lits;
    for (const auto& tok : split_ws(text)) lits.push_back(parse_literal(ssd.vars, tok));
    return Instantiation::of(std::move(lits));
}

}  // namespace

TEST_CASE("the two-gate circuit under C and D has exactly three diagnoses", "[oracle]") {
    Ssd ssd = parse_ssd(read_file(data_path("two_gate.ssd")));
    auto diagnoses = brute_diagnoses(ssd, parse_observation("C D", ssd));
    std::vector<Instantiation> expected{
        named_inst(ssd, "okX !okY"),
        named_inst(ssd, "!okX okY"),
        named_inst(ssd, "!okX !okY"),
    };
    std::sort(expected.begin(), expected.end());
    CHECK(diagnoses == expected);
}

TEST_CASE("an empty observation excludes no health assignment", "[oracle]") {
    Ssd ssd = parse_ssd(read_file(data_path("two_gate.ssd")));
    CHECK(brute_diagnoses(ssd, Observation{}).size() == 4);
}

TEST_CASE("an observation contradicting a hard constraint has no diagnoses", "[oracle]") {
    Ssd ssd = parse_ssd("var X\nvar Y\ncomponent X\ncomponent Y : X\nclause Y : !X Y |\n");
    auto diagnoses = brute_diagnoses(ssd, parse_observation("X !Y", ssd));
    CHECK(diagnoses.empty());
}

TEST_CASE("brute minimal picks the cheapest diagnoses", "[oracle]") {
    Ssd ssd = parse_ssd(read_file(data_path("three_gate.ssd")));
    CostFunction card = make_cardinality(ssd);
    auto result = brute_minimal(ssd, parse_observation("A E", ssd), card);
    CHECK(result.status == DiagnosisStatus::ok);
    CHECK(result.cost == 1);
    std::vector<Instantiation> expected{
        named_inst(ssd, "okX okY !okZ"),
        named_inst(ssd, "!okX okY okZ"),
    };
    std::sort(expected.begin(), expected.end());
    CHECK(result.diagnoses == expected);
}

TEST_CASE("a healthy-consistent observation has the all-healthy minimum", "[oracle]") {
    Ssd ssd = parse_ssd(read_file(data_path("two_gate.ssd")));
    auto result = brute_minimal(ssd, parse_observation("A", ssd), make_cardinality(ssd));
    REQUIRE(result.status == DiagnosisStatus::ok);
    CHECK(result.cost == 0);
    REQUIRE(result.diagnoses.size() == 1);
    CHECK(result.diagnoses[0] == named_inst(ssd, "okX okY"));
}

TEST_CASE("kernel diagnoses and minimal conflicts of a two-literal clause", "[oracle]") {
    VarTable t;
    VarId okx = t.add_binary("okX", VarKind::assumable);
    VarId oky = t.add_binary("okY", VarKind::assumable);
    // models of !okX or !okY
    std::vector<Instantiation> models{
        Instantiation::of({{okx, 0}, {oky, 0}}),
        Instantiation::of({{okx, 0}, {oky, 1}}),
        Instantiation::of({{okx, 1}, {oky, 0}}),
    };
    auto kernels = prime_implicants(models, {okx, oky}, t);
    std::vector<Instantiation> expected{
        Instantiation::of({{okx, 0}}),
        Instantiation::of({{oky, 0}}),
    };
    std::sort(expected.begin(), expected.end());
    CHECK(kernels == expected);

    auto conflicts = prime_implicates(models, {okx, oky}, t);
    REQUIRE(conflicts.size() == 1);
    CHECK(conflicts[0] == Clause::of({{okx, 0}, {oky, 0}}));
}

TEST_CASE("kernels and conflicts of the three-gate scenario", "[oracle]") {
    Ssd ssd = parse_ssd(read_file(data_path("three_gate.ssd")));
    auto models = brute_diagnoses(ssd, parse_observation("A E", ssd));
    CHECK(models.size() == 6);
    VarSet a_vars = ssd.assumable_set();
    auto kernels = prime_implicants(models, a_vars, ssd.vars);
    std::vector<Instantiation> expected{
        named_inst(ssd, "!okX"),
        named_inst(ssd, "!okZ"),
    };
    std::sort(expected.begin(), expected.end());
    CHECK(kernels == expected);

    auto conflicts = prime_implicates(models, a_vars, ssd.vars);
    REQUIRE(conflicts.size() == 1);
    CHECK(conflicts[0] ==
          Clause::of({{ssd.vars.find("okX"), 0}, {ssd.vars.find("okZ"), 0}}));
}

TEST_CASE("a valid consequence has the empty prime implicant", "[oracle]") {
    VarTable t;
    VarId ok = t.add_binary("ok", VarKind::assumable);
    std::vector<Instantiation> models{
        Instantiation::of({{ok, 0}}),
        Instantiation::of({{ok, 1}}),
    };
    auto kernels = prime_implicants(models, {ok}, t);
    REQUIRE(kernels.size() == 1);
    CHECK(kernels[0].empty());
    CHECK(prime_implicates(models, {ok}, t).empty());

    // the unsatisfiable sentence: empty clause is the only prime implicate
    auto conflicts = prime_implicates({}, {ok}, t);
    REQUIRE(conflicts.size() == 1);
    CHECK(conflicts[0].empty());
    CHECK(prime_implicants({}, {ok}, t).empty());
}

TEST_CASE("prime forms reconstruct the model set across the corpus", "[oracle]") {
    for (uint64_t seed = 200; seed < 240; ++seed) {
        GeneratedInstance gi = gen_random_circuit(seed);
        Ssd ssd = parse_ssd(gi.ssd_text);
        Observation obs = parse_observation(gi.obs_text, ssd);
        auto models = brute_diagnoses(ssd, obs);
        VarSet a_vars = ssd.assumable_set();
        auto kernels = prime_implicants(models, a_vars, ssd.vars);
        auto conflicts = prime_implicates(models, a_vars, ssd.vars);

        std::set<Instantiation> model_set(models.begin(), models.end());
        AssignmentEnv env(ssd.vars);
        for (const auto& omega : generate_instantiations(a_vars, env, ssd.vars)) {
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
            INFO("seed " << seed);
            CHECK(some_kernel == in_models);
            CHECK(all_conflicts == in_models);
        }
    }
}

TEST_CASE("oracle enumeration respects the cap", "[oracle]") {
    Ssd adder = parse_ssd(gen_adder(3, AdderObservation::none).ssd_text);
    CHECK_THROWS_AS(brute_diagnoses(adder, Observation{}), CapExceeded);
}

TEST_CASE("the oracle handles multivalued modes", "[oracle]") {
    // one input (lo/hi), one output, a mode variable with two fault values:
    // ok behaves as a buffer, stuck_lo pins the output low, stuck_hi high
    Ssd ssd = parse_ssd(
        "var I lo hi\n"
        "var O lo hi\n"
        "assumable M ok stuck_lo stuck_hi\n"
        "component I\n"
        "component O : I\n"
        "clause O : I=hi O=lo | M=stuck_lo M=stuck_hi\n"
        "clause O : I=lo O=hi | M=stuck_lo M=stuck_hi\n"
        "clause O : O=lo | M=ok M=stuck_hi\n"
        "clause O : O=hi | M=ok M=stuck_lo\n");
    REQUIRE(validate(ssd, ValidateLevel::full).ok());
    // observing I=lo, O=hi rules out ok and stuck_lo
    auto diagnoses = brute_diagnoses(ssd, parse_observation("I=lo O=hi", ssd));
    REQUIRE(diagnoses.size() == 1);
    CHECK(diagnoses[0] == named_inst(ssd, "M=stuck_hi"));
    // observing agreement keeps ok and the matching stuck mode
    diagnoses = brute_diagnoses(ssd, parse_observation("I=hi O=hi", ssd));
    REQUIRE(diagnoses.size() == 2);
}
