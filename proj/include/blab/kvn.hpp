#pragma once

#include <memory>
#include <vector>

#include "blab/flow.hpp"
#include "blab/op.hpp"

namespace blab {

/// Complex amplitudes over a PhaseLattice (p-major flattening), kept
/// normalized: integral of |psi|^2 over (p,q) = 1.
struct PhaseWavefunction {
  PhaseLattice lattice;
  CVector amplitudes;
  double norm = 0.0;
};

PhaseWavefunction make_phase_wavefunction(const PhaseLattice& pl,
                                          CVector amplitudes);

/// Complex amplitudes over a configuration Lattice.
struct ConfigWavefunction {
  Lattice lattice;
  CVector amplitudes;
};

/// Liouvillian L = -i f(q) d/dq + i (p f'(q) + g'(q)) d/dp in symmetrized
/// (hermitian) form over the phase lattice. Applies matrix-free through
/// batched FFTs; dense materialization is available below a size guard for
/// verification. Spectral bound covers the full symbol for the Chebyshev
/// propagator.
class Liouvillian {
 public:
  Liouvillian(const FlowField& field, const PhaseLattice& phase);
  ~Liouvillian();
  Liouvillian(Liouvillian&&) noexcept;
  Liouvillian& operator=(Liouvillian&&) noexcept;

  const PhaseLattice& lattice() const;
  CVector apply(const CVector& psi) const;
  double spectral_bound() const;

  /// Sampled coefficients: f at q_j and p f' + g' at (p_k, q_j).
  double f_at(std::size_t j) const;
  double m_at(std::size_t k, std::size_t j) const;

  /// Dense matrix (guarded: dimension <= 4096).
  CMatrix dense() const;
  OperatorMatrix dense_operator() const;

  /// Max |<u, L v> - <L u, v>| over `n_probes` pseudo-random unit pairs,
  /// normalized by the spectral bound.
  double hermiticity_residual(int n_probes, std::uint64_t seed) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Liouvillian build_liouvillian(const FlowField& field, const PhaseLattice& phase);

/// exp(-i L t) psi by Chebyshev expansion with Bessel coefficients (Miller
/// recurrence); accuracy target 1e-12 per slice, verified against dense
/// exponentials in the tests.
PhaseWavefunction evolve_phase(const PhaseWavefunction& psi, const Liouvillian& l,
                               double t);

/// rho_tilde(q_j) = dp * sum_k |psi(p_k, q_j)|^2.
RVector reduce_density(const PhaseWavefunction& psi);

/// psi_tilde(q_j) = dp * sum_k psi(p_k, q_j).
ConfigWavefunction reduce_wavefunction(const PhaseWavefunction& psi);

/// psi_tilde(t) = exp(-i H t) psi_tilde for any H over the config lattice
/// (hermitian or not; the PLeft continuity form is the documented caller).
ConfigWavefunction evolve_config(const ConfigWavefunction& psi,
                                 const OperatorMatrix& h, double t);

struct DensityEvolutionResult {
  RVector density;          // at t
  double mass_drift;        // |mass(t) - mass(0)|
  double liouville_residual;  // FD check of d rho/dt against the Liouville RHS
};

/// Evolves rho = |psi|^2 by evolving psi = sqrt(rho) (zero phase) and
/// squaring; checks d rho/dt against -f drho/dq + (p f' + g') drho/dp by a
/// centered finite difference with step fd_dt.
DensityEvolutionResult liouville_density_evolution(const RVector& rho0,
                                                   const Liouvillian& l,
                                                   double t,
                                                   double fd_dt = 1e-3);

/// Initial-data profiles for Born scenarios.
CVector config_profile(const std::string& name,
                       const std::map<std::string, double>& params,
                       const Lattice& lat);  // normalized: integral |phi|^2 = 1
RVector momentum_profile(const std::string& name,
                         const std::map<std::string, double>& params,
                         const PhaseLattice& phase);

struct BornSetup {
  FlowField field;
  PhaseLattice phase;
  CVector phi;   // over phase.q, integral |phi|^2 = 1
  RVector chi;   // over the p axis
  std::vector<double> times;  // increasing, starting at 0
  double tolerance = 1e-6;
};

struct BornReport {
  std::vector<double> times;
  std::vector<double> max_deviation;  // max_q |rho_tilde - |psi_tilde|^2|
  std::vector<double> norm_a;         // phase-space norm of pipeline A
  std::vector<double> norm_b;         // config norm of pipeline B
  std::vector<double> mass_a;         // integral of reduced density (A)
  std::vector<double> mass_b;         // integral of |psi_tilde|^2 (B)
  std::vector<double> boundary_mass;  // |psi|^2 mass in outermost 2 p-rows
  bool passed = false;
  bool boundary_warning = false;
};

/// Runs both pipelines on the shared time grid: (A) Liouvillian evolution of
/// psi(p,q) then reduce_density; (B) config evolution of psi_tilde with the
/// hermitized (Weyl-ordered) drift operator, then modulus squared.
/// Precondition: matched initial data, rho_tilde(0) = |psi_tilde(0)|^2 to 1e-10.
BornReport born_check(const BornSetup& setup);

}  // namespace blab
