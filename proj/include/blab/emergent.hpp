#pragma once

#include <optional>
#include <string>

#include "blab/op.hpp"

namespace blab {

/// Splitting H = H+ - H- with H+- = (rho +- H)^2 rho^{-1} / 4.
struct SplitPair {
  OperatorMatrix h_plus;
  OperatorMatrix h_minus;
  RVector rho;          // sampled positive function (constant allowed)
  OperatorMatrix source;  // the H that was split
};

struct SplitResiduals {
  double difference;      // max|H+ - H- - H| / max|H|
  double min_eig_plus;    // relative to max|H+|
  double min_eig_minus;
  double comm_plus_minus;  // max|[H+,H-]| / (max|H+| max|H-|)
  double comm_rho_plus;
  double comm_rho_minus;
};

SplitResiduals validate_split(const SplitPair& pair);

struct FlowInvariantCheck {
  double classical_residual;  // max|f drho/dq| / max rho
  double operator_residual;   // max|[diag rho, H]| / (max rho * max|H|)
};

/// The classical content of [rho, H] = 0 for H = p f(q) + g(q): rho must be
/// constant along the flow. Also reports the matrix commutator against the
/// Weyl Hamiltonian of the field.
FlowInvariantCheck check_flow_invariant(const RVector& rho,
                                        const FlowField& field,
                                        const Lattice& lat);

/// Gate: classical residual of check_flow_invariant must be <= 1e-8.
SplitPair split_hamiltonian(const OperatorMatrix& h, const RVector& rho,
                            const FlowField& field, const Lattice& lat);
SplitPair split_hamiltonian(const OperatorMatrix& h, double rho_const,
                            const FlowField& field, const Lattice& lat);

/// Coarse-graining constraint Phi_E = (1 - e^{-(E_p - E)/E}) H-.
struct Constraint {
  OperatorMatrix phi;
  double e_obs = 0.0;
  double e_planck = 0.0;
  double prefactor = 0.0;
};

Constraint build_constraint(const SplitPair& pair, double e_obs,
                            double e_planck);

/// Near-null space of Phi_E: eigenvectors with eigenvalue <= threshold * max
/// eigenvalue. A zero constraint returns the full space; an empty physical
/// subspace is a valid result, not an error.
struct PhysicalSubspace {
  CMatrix basis;  // orthonormal columns; 0 columns when empty
  std::size_t dimension = 0;
  double singular_threshold = 0.0;
};

PhysicalSubspace physical_subspace(const Constraint& c, double threshold);

struct EmergentEvolveResult {
  CVector state;
  double residual_h_vs_hplus;   // |(H - H+) psi| on input
  double residual_hplus_vs_rho; // |(H+ - diag rho) psi| on input
  double norm_drift;            // | ||out|| - ||in|| |
};

/// Schroedinger evolution exp(-i H+ t) on a physical state; verifies the
/// H = H+ = rho identities on the input and norm conservation.
EmergentEvolveResult emergent_evolve(const CVector& state,
                                     const SplitPair& pair, double t);

enum class GaugeGenerator { PhiE, SqrtPhi };

struct PhasePoint {
  double p = 0.0;
  double q = 0.0;
  bool out_of_bounds = false;
};

/// One explicit-Euler step of the Hamiltonian flow of the chosen gauge
/// generator, using analytic partials of the classical H- = (rho - H)^2/(4 rho)
/// with H = p f(q) + Re g(q); SqrtPhi uses phi = (rho - H)/2. Constant rho.
PhasePoint gauge_orbit(const PhasePoint& point, GaugeGenerator generator,
                       const FlowField& field, double rho_const, double epsilon,
                       double p_max);

/// Diagnostic bracket {phi, chi} at one phase point for a candidate
/// gauge-fixing function chi (supplied with its analytic partials). A
/// nonzero value certifies chi as admissible; no reduction is automated.
double gauge_fixing_bracket(const PhasePoint& point, GaugeGenerator generator,
                            const FlowField& field, double rho_const,
                            const std::function<double(double, double)>& dchi_dp,
                            const std::function<double(double, double)>& dchi_dq);

struct FirstClassCheck {
  double operator_residual;   // max|[Phi,H]| / (max|Phi| max|H|)
  double classical_residual;  // max|{Phi,H}| on the interior band
};

/// First-class property of the constraint: operator commutator with the Weyl
/// Hamiltonian, and the classical bracket {Phi, H} evaluated with the smooth
/// windowed-p surrogate on the interior band of the phase lattice.
FirstClassCheck first_class_check(const SplitPair& pair, const Constraint& c,
                                  const FlowField& field,
                                  const PhaseLattice& phase);

/// JSON physical-subspace report:
/// {e_obs, e_planck, prefactor, dimension, eigenvalues_of_H_minus,
///  physical_energies}.
std::string subspace_report_json(const SplitPair& pair, const Constraint& c,
                                 const PhysicalSubspace& sub);

}  // namespace blab
