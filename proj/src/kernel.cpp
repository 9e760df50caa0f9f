#include "blab/kernel.hpp"

#include <cmath>

namespace blab {

CVector TransportKernel::apply(const CVector& v) const {
  if (static_cast<std::size_t>(v.size()) != n)
    throw Error("TransportKernel::apply: shape mismatch");
  CVector out = CVector::Zero(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [row, w] : entries[i])
      if (w != 0.0) out[row] += w * v[i];
  return out;
}

RVector TransportKernel::apply(const RVector& v) const {
  if (static_cast<std::size_t>(v.size()) != n)
    throw Error("TransportKernel::apply: shape mismatch");
  RVector out = RVector::Zero(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [row, w] : entries[i])
      if (w != 0.0) out[row] += w * v[i];
  return out;
}

RMatrix TransportKernel::dense() const {
  RMatrix m = RMatrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [row, w] : entries[i]) m(row, i) += w;
  return m;
}

TransportKernel build_transport_kernel(const FlowField& field, const Lattice& lat,
                                       double delta_t, InterpOrder order,
                                       double ode_dt) {
  if (delta_t < 0.0) throw Error("build_transport_kernel: delta_t must be >= 0");
  TransportKernel k;
  k.n = lat.n_points;
  k.delta_t = delta_t;
  k.field_tag = field.name;
  k.order = order;
  k.entries.assign(lat.n_points, {{{0, 0.0}, {0, 0.0}}});
  for (std::size_t i = 0; i < lat.n_points; ++i) {
    const double target =
        delta_t == 0.0 ? lat.points[i]
                       : flow_map(field, lat.points[i], delta_t, ode_dt, lat.period);
    const double x = target / lat.spacing;
    if (order == InterpOrder::Nearest) {
      const auto site = static_cast<std::size_t>(std::llround(x)) % lat.n_points;
      k.entries[i][0] = {site, 1.0};
    } else {
      const double fl = std::floor(x);
      double theta = x - fl;
      std::size_t j0 = static_cast<std::size_t>(
          static_cast<long long>(fl) % static_cast<long long>(lat.n_points));
      // Snap to the node when the image lands on it up to rounding, so
      // resonant steps stay exact permutations.
      if (theta < 1e-12) {
        theta = 0.0;
      } else if (theta > 1.0 - 1e-12) {
        theta = 0.0;
        j0 = (j0 + 1) % lat.n_points;
      }
      const std::size_t j1 = (j0 + 1) % lat.n_points;
      k.entries[i][0] = {j0, 1.0 - theta};
      k.entries[i][1] = {j1, theta};
    }
  }
  return k;
}

PropagatePair propagate_both(const TransportKernel& kernel,
                             const ConfigWavefunction& psi_tilde,
                             const RVector& rho_tilde) {
  if (static_cast<std::size_t>(psi_tilde.amplitudes.size()) != kernel.n ||
      static_cast<std::size_t>(rho_tilde.size()) != kernel.n)
    throw Error("propagate_both: shape mismatch");
  PropagatePair out;
  out.psi.lattice = psi_tilde.lattice;
  out.psi.amplitudes = kernel.apply(psi_tilde.amplitudes);
  out.rho = kernel.apply(rho_tilde);
  return out;
}

double symplectic_action(const std::vector<double>& p_path,
                         const std::vector<double>& q_path,
                         double dt_path, const FlowField& field) {
  if (p_path.size() != q_path.size())
    throw Error("symplectic_action: ragged path");
  if (p_path.size() < 3)
    throw Error("symplectic_action: need at least 3 time points");
  if (!(dt_path > 0.0)) throw Error("symplectic_action: dt must be positive");
  double action = 0.0;
  for (std::size_t k = 0; k + 1 < p_path.size(); ++k) {
    const double pm = 0.5 * (p_path[k] + p_path[k + 1]);
    const double qm = 0.5 * (q_path[k] + q_path[k + 1]);
    const double pdot = (p_path[k + 1] - p_path[k]) / dt_path;
    const double qdot = (q_path[k + 1] - q_path[k]) / dt_path;
    double h = pm * field.f(qm);
    if (field.has_g()) h += field.g(qm).real();
    action += (0.5 * (pm * qdot - qm * pdot) - h) * dt_path;
  }
  return action;
}

KernelCompareReport kernel_vs_spectral(const FlowField& field, const Lattice& lat,
                                       double delta_t, int n_steps,
                                       const RVector& rho0, InterpOrder order,
                                       double p_max) {
  if (static_cast<std::size_t>(rho0.size()) != lat.n_points)
    throw Error("kernel_vs_spectral: density length mismatch");
  const TransportKernel kernel =
      build_transport_kernel(field, lat, delta_t, order);

  // Spectral reference: KvN phase-space evolution of a separable state with
  // a unit-box p profile and sqrt-density q profile; its reduced density
  // follows the Liouville transport of rho0.
  const PhaseLattice phase = make_phase_lattice(lat.n_points, lat.n_points, p_max);
  const RVector chi = momentum_profile("unit_box", {}, phase);
  CVector amps(phase.size());
  for (std::size_t k = 0; k < phase.n_p(); ++k)
    for (std::size_t j = 0; j < phase.n_q(); ++j)
      amps[phase.flat(k, j)] = chi[k] * std::sqrt(std::max(rho0[j], 0.0));
  PhaseWavefunction psi = make_phase_wavefunction(phase, amps);
  const Liouvillian liou = build_liouvillian(field, phase);

  KernelCompareReport report;
  RVector rho_k = rho0;
  const double mass0 = quadrature(lat, rho_k);
  for (int s = 0; s < n_steps; ++s) {
    rho_k = kernel.apply(rho_k);
    psi = evolve_phase(psi, liou, delta_t);
    const RVector rho_s = reduce_density(psi);
    const RVector diff = rho_k - rho_s;
    report.l1.push_back(diff.cwiseAbs().sum() * lat.spacing);
    report.linf.push_back(diff.cwiseAbs().maxCoeff());
  }
  report.cumulative_l1 = report.l1.empty() ? 0.0 : report.l1.back();
  report.cumulative_linf = report.linf.empty() ? 0.0 : report.linf.back();
  report.mass_drift = std::abs(quadrature(lat, rho_k) - mass0);
  return report;
}

void save_kernel_blab(const std::filesystem::path& path,
                      const TransportKernel& k) {
  save_matrix_blab(path, k.dense());
}

}  // namespace blab
