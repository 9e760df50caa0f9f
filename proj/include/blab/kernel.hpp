#pragma once

#include <filesystem>

#include "blab/kvn.hpp"

namespace blab {

enum class InterpOrder { Nearest, Linear };

/// Lattice transport kernel K[j,i]: interpolation weights placing source
/// site q_i at its flow-map image F(q_i, dt). Column sums are exactly 1, so
/// one application preserves the lattice quadrature of any density. Nearest
/// gives a 0/1 permutation-like matrix; Linear splits between the two
/// neighboring sites.
struct TransportKernel {
  std::size_t n = 0;
  double delta_t = 0.0;
  std::string field_tag;
  InterpOrder order = InterpOrder::Linear;
  // Per source column: up to two (row, weight) entries.
  std::vector<std::array<std::pair<std::size_t, double>, 2>> entries;

  CVector apply(const CVector& v) const;
  RVector apply(const RVector& v) const;
  RMatrix dense() const;
};

TransportKernel build_transport_kernel(const FlowField& field, const Lattice& lat,
                                       double delta_t, InterpOrder order,
                                       double ode_dt = 1e-3);

/// Applies the SAME kernel to an amplitude and a density.
struct PropagatePair {
  ConfigWavefunction psi;
  RVector rho;
};

PropagatePair propagate_both(const TransportKernel& kernel,
                             const ConfigWavefunction& psi_tilde,
                             const RVector& rho_tilde);

/// Midpoint-rule discretization of the phase-space action
/// integral of (1/2) xi . omega . xi_dot - H(xi) with xi = (p, q) and
/// xi omega xi_dot = p q_dot - q p_dot. The path arrays share one uniform
/// time step; closed loops repeat the first point at the end.
double symplectic_action(const std::vector<double>& p_path,
                         const std::vector<double>& q_path,
                         double dt_path, const FlowField& field);

struct KernelCompareReport {
  std::vector<double> l1;        // per output step, kernel vs spectral
  std::vector<double> linf;
  double cumulative_l1 = 0.0;    // at the final step
  double cumulative_linf = 0.0;
  double mass_drift = 0.0;
};

/// Propagates a density n_steps times by the transport kernel and by the
/// KvN phase-space pipeline (box p-profile, sqrt-density amplitudes),
/// reporting the divergence per step.
KernelCompareReport kernel_vs_spectral(const FlowField& field, const Lattice& lat,
                                       double delta_t, int n_steps,
                                       const RVector& rho0, InterpOrder order,
                                       double p_max = 8.0);

/// Kernel export in the BLAB container (real64 payload).
void save_kernel_blab(const std::filesystem::path& path,
                      const TransportKernel& k);

}  // namespace blab
