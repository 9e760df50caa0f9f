// Scenario-driven runner: parses an experiment config, executes the named
// pipeline, emits machine-readable artifacts under the output directory.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "blab/runner.hpp"

namespace {

unsigned thread_cap_from_env() {
  const char* env = std::getenv("BEABLE_LAB_THREADS");
  if (!env) return 0;
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(v) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beable-lab: deterministic be-able dynamics laboratory"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;

  for (const auto& name : blab::known_subcommands()) {
    CLI::App* sub = app.add_subcommand(
        name, name == "all" ? "run every pipeline" : "run the " + name + " pipeline");
    sub->add_option("scenario", scenario_path, "scenario file (.toml or .json)")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--override", overrides,
                    "key=value overrides, dotted keys (repeatable)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    const blab::Scenario scenario =
        blab::parse_scenario_with_overrides(scenario_path, overrides);
    const std::string hash = blab::hash_file(scenario_path);
    const blab::RunResult rr = blab::run_subcommand(
        subcommand, scenario, out_dir, hash, thread_cap_from_env());
    std::cout << (rr.exit_code == 0 ? "PASS " : "FAIL ") << subcommand << " "
              << scenario.name << " -> " << rr.result_dir.string() << "\n";
    return rr.exit_code;
  } catch (const std::exception& e) {
    // Parse-time and I/O failures: structured JSON on stderr, nonzero exit.
    std::cerr << "{\"error\": \"" << e.what() << "\", \"passed\": false}\n";
    return 2;
  }
}
