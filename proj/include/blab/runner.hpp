#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blab/scenario.hpp"

namespace blab {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
  int exit_code = 0;                 // 0 iff every tolerance gate passed
  std::filesystem::path result_dir;  // out/<scenario>/<subcommand>/
};

/// Executes one named pipeline and writes result.json, CSV tables and a run
/// manifest under out_dir/<scenario-name>/<subcommand>/. Failures become
/// structured JSON plus a nonzero exit code; nothing throws past this call.
RunResult run_subcommand(const std::string& subcommand, const Scenario& scenario,
                         const std::filesystem::path& out_dir,
                         const std::string& scenario_hash,
                         unsigned max_threads = 0);

/// FNV-1a 64 hash of the scenario file bytes, hex-encoded.
std::string hash_file(const std::filesystem::path& path);

const std::vector<std::string>& known_subcommands();

}  // namespace blab
