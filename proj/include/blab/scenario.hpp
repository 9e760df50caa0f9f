#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blab/flow.hpp"

namespace blab {

/// A complete experiment description. Strict schema: unknown keys are
/// rejected; physics-bearing values (rho, energy scales) must be explicit
/// or explicitly marked default.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;

  std::string field_name;
  std::map<std::string, double> field_params;

  std::size_t n_q = 64;
  std::size_t n_p = 64;
  double p_max = 8.0;

  double rho_value = 2.0;
  double e_obs = 0.01;
  double e_planck = 1.0;

  std::string phi_name = "one_plus_eiq";
  std::map<std::string, double> phi_params;
  std::string chi_name = "unit_box";
  std::map<std::string, double> chi_params;

  double t_final = 0.0;
  std::size_t n_outputs = 8;

  double born_tol = 1e-6;
  double subspace_threshold = 1e-8;

  std::size_t ensemble_samples = 100000;
  double ensemble_dt = 1e-3;
  double ensemble_l1_tol = 0.05;

  double kernel_delta_t = 0.05;
  int kernel_steps = 10;
  std::string kernel_order = "linear";
  double kernel_l1_tol = 2e-2;

  FlowField field() const;
  std::vector<double> output_times() const;
};

Scenario scenario_from_json(const nlohmann::ordered_json& j);
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text,
                             const std::string& extension);
Scenario parse_scenario_with_overrides(const std::filesystem::path& path,
                                       const std::vector<std::string>& overrides);

}  // namespace blab
