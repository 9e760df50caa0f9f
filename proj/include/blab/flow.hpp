#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blab/lattice.hpp"

namespace blab {

/// Be-able velocity field q' = f(q) on a periodic configuration space,
/// with optional complex scalar g(q). df is the analytic derivative of f
/// (the Liouvillian and gauge flows need it).
struct FlowField {
  std::string name;
  int dimension = 1;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<Complex(double)> g;  // empty if absent
  // Callbacks that may not be invoked from worker threads (e.g. Python
  // closures holding the interpreter lock) set this to false.
  bool parallel_safe = true;

  bool has_g() const { return static_cast<bool>(g); }
  RVector sample_f(const Lattice& lat) const;
  RVector sample_df(const Lattice& lat) const;
  CVector sample_g(const Lattice& lat) const;  // zeros if absent
};

/// Built-in catalog: "uniform" {omega}, "shifted_sine" {a, b} with |b| < a,
/// "double_well_drift" {a, b} with |b| < a.
FlowField catalog_field(const std::string& name,
                        const std::map<std::string, double>& params);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> states;            // wrapped into [0, period)
  std::vector<double> unwrapped_states;  // raw integrator output
};

/// Fixed-step RK4. Throws on non-finite state, reporting the failure time.
Trajectory integrate_trajectory(const FlowField& field, double q0,
                                double t_final, double dt,
                                double period = kTwoPi);

/// Endpoint of the flow map F(q0, delta_t), wrapped into [0, period).
double flow_map(const FlowField& field, double q0, double delta_t, double dt,
                double period = kTwoPi);

/// Unwrapped endpoint; delta_t may be negative (backward flow).
double flow_map_unwrapped(const FlowField& field, double q0, double delta_t,
                          double dt);

/// Canonical Poisson bracket {A,B} = dA/dq dB/dp - dA/dp dB/dq via spectral
/// derivatives over the phase lattice (p-major flattened samples).
CVector poisson_bracket(const PhaseLattice& pl, const CVector& a,
                        const CVector& b);

/// SplitMix64 keyed per sample: u_i = mix(seed + (i+1)*golden), mapped to
/// [0,1) with 53-bit resolution. Documented generator for reproducibility.
double sample_uniform01(std::uint64_t seed, std::uint64_t index);

/// Draws q0 from density0 by inverse CDF over cells [q_j - dq/2, q_j + dq/2),
/// evolves each sample with the flow map, histograms by nearest lattice site,
/// returns the normalized density. Deterministic given seed, independent of
/// worker count (integer counts, per-sample keys).
RVector ensemble_sample(const FlowField& field, const Lattice& lat,
                        const RVector& density0, std::size_t n_samples,
                        double t_final, std::uint64_t seed, double dt = 1e-3,
                        unsigned max_threads = 0);

/// Smooth periodic stand-ins for the sawtooth coordinate functions: slope 1
/// on the interior band, built as trig polynomials (coordinate minus the
/// spectral antiderivative of a von Mises bump at the wrap).
struct CoordinateSurrogate {
  RVector values;
  std::vector<bool> interior;  // where the slope is 1 to ~1e-12
};

/// `offset` shifts the reported values (use -p_max for the p axis).
CoordinateSurrogate coordinate_surrogate(const Lattice& lat, double offset = 0.0,
                                         double kappa = 0.0);

/// Smooth plateau window: 1 on |x - period/2| < half_width around the
/// domain center, 0 near the wrap, built spectrally. For the p axis of a
/// PhaseLattice this windows |p| < half_width.
struct PlateauWindow {
  RVector values;
  std::vector<bool> plateau;  // where the window is 1 to ~1e-12
};

PlateauWindow plateau_window(const Lattice& lat, double half_width,
                             double kappa = 0.0);

}  // namespace blab
