#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "blab/scenario.hpp"
#include "blab/toml_min.hpp"

using namespace blab;

namespace {

const char* kMinimalToml = R"(
name = "rotor"

[field]
name = "uniform"

[rho]
default = true

[energy]
default = true

[time]
t_final = 6.283185307179586
)";

}  // namespace

TEST_CASE("toml subset parser handles tables, scalars, arrays, comments") {
  const auto j = parse_toml_subset(R"(
# top comment
title = "demo"   # trailing comment
count = 3
ratio = 0.5
flag = true
values = [1.0, 2.0, 3.0]

[section]
key = "v"

[section.nested]
x = 1
)");
  CHECK(j.at("title") == "demo");
  CHECK(j.at("count") == 3);
  CHECK(j.at("ratio") == 0.5);
  CHECK(j.at("flag") == true);
  CHECK(j.at("values").size() == 3);
  CHECK(j.at("section").at("key") == "v");
  CHECK(j.at("section").at("nested").at("x") == 1);
}

TEST_CASE("toml subset parser rejects malformed input") {
  CHECK_THROWS_WITH_AS(parse_toml_subset("key"), doctest::Contains("line 1"),
                       Error);
  CHECK_THROWS_AS(parse_toml_subset("a = [1, 2"), Error);
  CHECK_THROWS_AS(parse_toml_subset("x = 1\nx = 2"), Error);
  CHECK_THROWS_AS(parse_toml_subset("[t\nx = 1"), Error);
  CHECK_THROWS_AS(parse_toml_subset("x = \"unterminated"), Error);
}

TEST_CASE("minimal scenario fills documented defaults") {
  const Scenario sc = parse_scenario_text(kMinimalToml, ".toml");
  CHECK(sc.name == "rotor");
  CHECK(sc.n_q == 64);
  CHECK(sc.n_p == 64);
  CHECK(sc.p_max == 8.0);
  CHECK(sc.born_tol == 1e-6);
  CHECK(sc.subspace_threshold == 1e-8);
  CHECK(sc.rho_value == 2.0);
  CHECK(sc.e_planck == 1.0);
  CHECK(sc.e_obs == 0.01);
  CHECK(sc.seed == 0);
  CHECK(sc.phi_name == "one_plus_eiq");
  CHECK(sc.chi_name == "unit_box");
  CHECK(sc.output_times().size() == 9);
  CHECK(sc.output_times().front() == 0.0);
  CHECK(sc.output_times().back() == doctest::Approx(kTwoPi));
}

TEST_CASE("scenario rejects e_obs > e_planck naming both values") {
  const std::string bad = R"(
name = "bad"
[field]
name = "uniform"
[rho]
value = 2.0
[energy]
e_obs = 2.0
e_planck = 1.0
[time]
t_final = 1.0
)";
  try {
    parse_scenario_text(bad, ".toml");
    FAIL("expected a throw");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("e_obs") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("scenario rejects unknown keys") {
  const std::string bad = R"(
name = "bad"
rho_typo = 1.0
[field]
name = "uniform"
[rho]
value = 2.0
[energy]
default = true
[time]
t_final = 1.0
)";
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad, ".toml"),
                       doctest::Contains("unknown key"), Error);
}

TEST_CASE("scenario requires explicit rho and energy") {
  const std::string missing_rho = R"(
name = "x"
[field]
name = "uniform"
[energy]
default = true
[time]
t_final = 1.0
)";
  CHECK_THROWS_WITH_AS(parse_scenario_text(missing_rho, ".toml"),
                       doctest::Contains("rho"), Error);
}

TEST_CASE("scenario type errors are reported with the key name") {
  const std::string bad = R"(
name = "x"
[field]
name = "uniform"
[rho]
value = "soup"
[energy]
default = true
[time]
t_final = 1.0
)";
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad, ".toml"),
                       doctest::Contains("rho.value"), Error);
}

TEST_CASE("json scenarios parse identically") {
  const std::string json = R"({
    "name": "rotor",
    "field": {"name": "uniform", "params": {"omega": 1.0}},
    "rho": {"value": 2.0},
    "energy": {"e_obs": 0.01, "e_planck": 1.0},
    "time": {"t_final": 1.0, "n_outputs": 4},
    "lattice": {"n_q": 32, "n_p": 16, "p_max": 4.0},
    "seed": 7
  })";
  const Scenario sc = parse_scenario_text(json, ".json");
  CHECK(sc.n_q == 32);
  CHECK(sc.n_p == 16);
  CHECK(sc.p_max == 4.0);
  CHECK(sc.seed == 7);
  CHECK(sc.field().name == "uniform");
}

TEST_CASE("overrides rewrite nested keys before validation") {
  const auto dir = std::filesystem::temp_directory_path() / "blab_scenario";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.toml";
  std::ofstream(path) << kMinimalToml;
  const Scenario sc = parse_scenario_with_overrides(
      path, {"lattice.n_q=128", "tolerances.born_tol=1e-4", "seed=9"});
  CHECK(sc.n_q == 128);
  CHECK(sc.born_tol == 1e-4);
  CHECK(sc.seed == 9);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unsupported extension is rejected") {
  CHECK_THROWS_WITH_AS(parse_scenario_text("{}", ".yaml"),
                       doctest::Contains("extension"), Error);
}

#include "blab/runner.hpp"

TEST_CASE("runner: failing gates produce structured JSON, never a crash") {
  // two_bump chi violates the Born matching precondition; the stage must
  // report {"error": ..., "passed": false} and exit nonzero.
  Scenario sc;
  sc.name = "failing";
  sc.field_name = "uniform";
  sc.field_params = {{"omega", 1.0}};
  sc.n_q = 32;
  sc.n_p = 64;
  sc.chi_name = "two_bump";
  sc.t_final = 0.5;
  sc.n_outputs = 2;
  const auto dir = std::filesystem::temp_directory_path() / "blab_runner_test";
  std::filesystem::remove_all(dir);
  const RunResult rr = run_subcommand("born-check", sc, dir, "testhash");
  CHECK(rr.exit_code == 1);
  std::ifstream in(rr.result_dir / "result.json");
  REQUIRE(in.good());
  const auto j = nlohmann::ordered_json::parse(in);
  CHECK(j.contains("error"));
  CHECK(j.at("passed") == false);
  std::ifstream manifest(rr.result_dir / "manifest.json");
  REQUIRE(manifest.good());
  const auto mj = nlohmann::ordered_json::parse(manifest);
  CHECK(mj.at("scenario_hash") == "testhash");
  std::filesystem::remove_all(dir);
}

TEST_CASE("runner rejects unknown subcommands with structured output") {
  Scenario sc;
  sc.name = "x";
  sc.field_name = "uniform";
  sc.t_final = 1.0;
  const auto dir = std::filesystem::temp_directory_path() / "blab_runner_test2";
  const RunResult rr = run_subcommand("frobnicate", sc, dir, "h");
  CHECK(rr.exit_code == 1);
  std::ifstream in(rr.result_dir / "result.json");
  const auto j = nlohmann::ordered_json::parse(in);
  CHECK(j.contains("error"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario guards against absurd sizes") {
  const std::string big = R"(
name = "x"
[field]
name = "uniform"
[rho]
default = true
[energy]
default = true
[time]
t_final = 1.0
[lattice]
n_q = -4
)";
  CHECK_THROWS_WITH_AS(parse_scenario_text(big, ".toml"),
                       doctest::Contains("lattice sizes"), Error);
}
