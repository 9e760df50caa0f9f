#include "blab/runner.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "blab/emergent.hpp"
#include "blab/kernel.hpp"
#include "blab/kvn.hpp"

namespace blab {

namespace {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string());
  out << text;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) text += ',';
      text += format_double(columns[c][r]);
    }
    text += '\n';
  }
  write_text(path, text);
}

struct StageTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

ordered_json run_spectrum(const Scenario& sc, const std::filesystem::path& dir) {
  const FlowField field = sc.field();
  const Lattice lat = make_lattice(sc.n_q);
  const OperatorMatrix weyl = build_hamiltonian(field, lat, Ordering::Weyl);
  const OperatorMatrix pleft_h =
      build_hamiltonian_pleft_with_g(field, lat, hermitize_g(field, lat));
  const Spectrum spec = spectrum(weyl);
  // The ordering identity Weyl = PLeft + (i/2) f' holds on the resolved
  // band; the raw matrices differ at the Nyquist wrap by alias entries.
  const double hscale = std::max(max_abs(weyl.m), 1e-300);
  const double ordering_gap =
      resolved_band_apply_norm(CMatrix(weyl.m - pleft_h.m)) / hscale;
  const double ordering_gap_full =
      max_abs(CMatrix(weyl.m - pleft_h.m)) / hscale;
  const double pleft_herm_band =
      resolved_band_apply_norm(CMatrix(pleft_h.m - pleft_h.m.adjoint())) / hscale;

  std::vector<double> re(spec.values.size());
  for (Eigen::Index i = 0; i < spec.values.size(); ++i)
    re[static_cast<std::size_t>(i)] = spec.values[i].real();
  write_csv(dir / "spectrum.csv", {"index", "eigenvalue"},
            {[&] {
               std::vector<double> idx(re.size());
               for (std::size_t i = 0; i < re.size(); ++i)
                 idx[i] = static_cast<double>(i);
               return idx;
             }(),
             re});
  save_matrix_blab(dir / "weyl_hamiltonian.blab", weyl.m);
  save_matrix_csv(dir / "weyl_hamiltonian.csv", weyl.m);

  std::size_t negatives = 0;
  for (double v : re)
    if (v < -1e-12) ++negatives;

  ordered_json res;
  res["weyl_hermitian"] = weyl.hermitian;
  res["ordering_identity_resolved_band"] = ordering_gap;
  res["ordering_identity_full_matrix"] = ordering_gap_full;
  res["pleft_hermitized_band_defect"] = pleft_herm_band;
  res["min_eigenvalue"] = re.front();
  res["max_eigenvalue"] = re.back();
  res["negative_eigenvalues"] = negatives;
  res["passed"] = weyl.hermitian && ordering_gap <= 1e-10 &&
                  pleft_herm_band <= 1e-10;
  return res;
}

ordered_json run_split(const Scenario& sc, const std::filesystem::path& dir) {
  const FlowField field = sc.field();
  const Lattice lat = make_lattice(sc.n_q);
  const OperatorMatrix h = build_hamiltonian(field, lat, Ordering::Weyl);
  const SplitPair pair = split_hamiltonian(h, sc.rho_value, field, lat);
  const SplitResiduals resid = validate_split(pair);
  const Constraint c = build_constraint(pair, sc.e_obs, sc.e_planck);
  const PhysicalSubspace sub = physical_subspace(c, sc.subspace_threshold);

  write_text(dir / "subspace.json", subspace_report_json(pair, c, sub));

  const bool gates =
      resid.difference <= 1e-10 && resid.min_eig_plus >= -1e-8 &&
      resid.min_eig_minus >= -1e-8 && resid.comm_plus_minus <= 1e-8 &&
      resid.comm_rho_plus <= 1e-8 && resid.comm_rho_minus <= 1e-8;

  ordered_json res;
  res["rho"] = sc.rho_value;
  res["splitting_difference_residual"] = resid.difference;
  res["min_eig_plus_rel"] = resid.min_eig_plus;
  res["min_eig_minus_rel"] = resid.min_eig_minus;
  res["comm_plus_minus"] = resid.comm_plus_minus;
  res["comm_rho_plus"] = resid.comm_rho_plus;
  res["comm_rho_minus"] = resid.comm_rho_minus;
  res["prefactor"] = c.prefactor;
  res["physical_dimension"] = sub.dimension;
  res["passed"] = gates;
  return res;
}

ordered_json run_born(const Scenario& sc, const std::filesystem::path& dir) {
  BornSetup setup;
  setup.field = sc.field();
  setup.phase = make_phase_lattice(sc.n_q, sc.n_p, sc.p_max);
  setup.phi = config_profile(sc.phi_name, sc.phi_params, setup.phase.q);
  setup.chi = momentum_profile(sc.chi_name, sc.chi_params, setup.phase);
  setup.times = sc.output_times();
  setup.tolerance = sc.born_tol;
  const BornReport report = born_check(setup);

  write_csv(dir / "born.csv",
            {"t", "max_deviation", "norm_A", "norm_B", "mass_A", "mass_B"},
            {report.times, report.max_deviation, report.norm_a, report.norm_b,
             report.mass_a, report.mass_b});

  double worst = 0.0;
  for (double d : report.max_deviation) worst = std::max(worst, d);
  ordered_json res;
  res["tolerance"] = sc.born_tol;
  res["max_deviation"] = worst;
  res["boundary_warning"] = report.boundary_warning;
  res["passed"] = report.passed;
  return res;
}

ordered_json run_kernel_compare(const Scenario& sc,
                                const std::filesystem::path& dir) {
  const FlowField field = sc.field();
  const Lattice lat = make_lattice(sc.n_q);
  const CVector phi = config_profile(sc.phi_name, sc.phi_params, lat);
  const RVector rho0 = phi.cwiseAbs2();
  const InterpOrder order = sc.kernel_order == "nearest" ? InterpOrder::Nearest
                                                         : InterpOrder::Linear;
  const KernelCompareReport report = kernel_vs_spectral(
      field, lat, sc.kernel_delta_t, sc.kernel_steps, rho0, order, sc.p_max);

  std::vector<double> steps(report.l1.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
    steps[i] = static_cast<double>(i + 1);
  write_csv(dir / "kernel_compare.csv", {"step", "l1", "linf"},
            {steps, report.l1, report.linf});

  // Amplitude/probability duality through the same kernel, plus the binary
  // export of the kernel itself.
  const TransportKernel kernel =
      build_transport_kernel(field, lat, sc.kernel_delta_t, order);
  save_kernel_blab(dir / "kernel.blab", kernel);
  ConfigWavefunction psi{lat, phi};
  const PropagatePair both = propagate_both(kernel, psi, rho0);
  const double duality =
      (both.psi.amplitudes.cwiseAbs2() - both.rho).cwiseAbs().maxCoeff();

  ordered_json res;
  res["cumulative_l1"] = report.cumulative_l1;
  res["cumulative_linf"] = report.cumulative_linf;
  res["mass_drift"] = report.mass_drift;
  res["duality_linf_single_step"] = duality;
  res["l1_tolerance"] = sc.kernel_l1_tol;
  res["passed"] =
      report.cumulative_l1 <= sc.kernel_l1_tol && report.mass_drift <= 1e-8;
  return res;
}

ordered_json run_ensemble(const Scenario& sc, const std::filesystem::path& dir,
                          unsigned max_threads) {
  const FlowField field = sc.field();
  const Lattice lat = make_lattice(sc.n_q);
  const CVector phi = config_profile(sc.phi_name, sc.phi_params, lat);
  const RVector rho0 = phi.cwiseAbs2();
  const RVector mc = ensemble_sample(field, lat, rho0, sc.ensemble_samples,
                                     sc.t_final, sc.seed, sc.ensemble_dt,
                                     max_threads);

  // KvN reference for the same horizon.
  const PhaseLattice phase = make_phase_lattice(sc.n_q, sc.n_p, sc.p_max);
  const RVector chi = momentum_profile("unit_box", {}, phase);
  CVector amps(phase.size());
  for (std::size_t k = 0; k < phase.n_p(); ++k)
    for (std::size_t j = 0; j < phase.n_q(); ++j)
      amps[phase.flat(k, j)] = chi[k] * std::abs(phi[j]);
  const PhaseWavefunction psi0 = make_phase_wavefunction(phase, amps);
  const Liouvillian liou = build_liouvillian(field, phase);
  const PhaseWavefunction psit = evolve_phase(psi0, liou, sc.t_final);
  const RVector ref = reduce_density(psit);

  const double l1 = (mc - ref).cwiseAbs().sum() * lat.spacing;
  std::vector<double> qcol(lat.n_points), mccol(lat.n_points), refcol(lat.n_points);
  for (std::size_t j = 0; j < lat.n_points; ++j) {
    qcol[j] = lat.points[j];
    mccol[j] = mc[j];
    refcol[j] = ref[j];
  }
  write_csv(dir / "ensemble.csv", {"q", "mc_density", "kvn_density"},
            {qcol, mccol, refcol});

  ordered_json res;
  res["n_samples"] = sc.ensemble_samples;
  res["seed"] = sc.seed;
  res["l1_vs_kvn"] = l1;
  res["l1_tolerance"] = sc.ensemble_l1_tol;
  res["passed"] = l1 <= sc.ensemble_l1_tol;
  return res;
}

}  // namespace

const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> cmds = {
      "spectrum", "split", "born-check", "kernel-compare", "ensemble", "all"};
  return cmds;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("hash_file: cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run_subcommand(const std::string& subcommand, const Scenario& scenario,
                         const std::filesystem::path& out_dir,
                         const std::string& scenario_hash,
                         unsigned max_threads) {
  RunResult rr;
  const std::filesystem::path dir = out_dir / scenario.name / subcommand;
  rr.result_dir = dir;
  std::filesystem::create_directories(dir);

  ordered_json manifest;
  manifest["scenario"] = scenario.name;
  manifest["scenario_hash"] = scenario_hash;
  manifest["subcommand"] = subcommand;
  manifest["version"] = kVersion;
  manifest["seed"] = scenario.seed;
  ordered_json timings = ordered_json::object();

  ordered_json result;
  bool passed = true;
  try {
    if (subcommand == "all") {
      ordered_json stages = ordered_json::object();
      for (const std::string stage :
           {"spectrum", "split", "born-check", "kernel-compare", "ensemble"}) {
        StageTimer timer;
        const RunResult sub =
            run_subcommand(stage, scenario, out_dir, scenario_hash, max_threads);
        timings[stage] = timer.ms();
        std::ifstream in(sub.result_dir / "result.json");
        ordered_json stage_result = ordered_json::parse(in);
        stages[stage] = stage_result;
        if (sub.exit_code != 0) passed = false;
      }
      result = stages;
      result["passed"] = passed;
    } else {
      StageTimer timer;
      if (subcommand == "spectrum") {
        result = run_spectrum(scenario, dir);
      } else if (subcommand == "split") {
        result = run_split(scenario, dir);
      } else if (subcommand == "born-check") {
        result = run_born(scenario, dir);
      } else if (subcommand == "kernel-compare") {
        result = run_kernel_compare(scenario, dir);
      } else if (subcommand == "ensemble") {
        result = run_ensemble(scenario, dir, max_threads);
      } else {
        throw Error("unknown subcommand '" + subcommand + "'");
      }
      timings[subcommand] = timer.ms();
      passed = result.value("passed", false);
    }
  } catch (const std::exception& e) {
    result = ordered_json::object();
    result["error"] = e.what();
    result["passed"] = false;
    passed = false;
  }

  write_text(dir / "result.json", result.dump(2) + "\n");
  manifest["timings_ms"] = timings;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  rr.exit_code = passed ? 0 : 1;
  return rr;
}

}  // namespace blab
