#pragma once

#include <cstddef>
#include <vector>

#include "blab/common.hpp"

namespace blab {

/// Uniform periodic grid q_j = j * spacing on [0, period).
struct Lattice {
  std::size_t n_points = 0;
  double period = kTwoPi;
  double spacing = 0.0;
  std::vector<double> points;

  std::size_t n() const { return n_points; }
};

/// n_points must be even and >= 4; period > 0.
Lattice make_lattice(std::size_t n_points, double period = kTwoPi);

/// Signed integer wavenumber for DFT bin m (0..n-1): {0,.,n/2-1,-n/2,.,-1}.
/// The Nyquist bin carries -n/2, which fixes the derivative-matrix spectrum.
long wavenumber_index(std::size_t m, std::size_t n);

/// Physical wavenumbers k_m = (2pi/period) * wavenumber_index(m).
std::vector<double> wavenumbers(const Lattice& lat);

/// Fourier spectral derivative; exact on resolved modes.
CVector spectral_derivative(const Lattice& lat, const CVector& values);

/// Spectral antiderivative of a mean-zero sampled function (mode 0 of the
/// input is dropped; output has zero mean).
CVector spectral_antiderivative(const Lattice& lat, const CVector& values);

/// Dense derivative matrix; columns are spectral derivatives of unit samples,
/// so D * v agrees with spectral_derivative(v) to rounding. Anti-hermitian.
CMatrix derivative_matrix(const Lattice& lat);

/// Rectangle-rule quadrature: spacing * sum(values).
Complex quadrature(const Lattice& lat, const CVector& values);
double quadrature(const Lattice& lat, const RVector& values);

/// Tensor-product grid over (p, q). Flattened index convention is p-major:
/// flat[k * n_q + j] = value at (p_k, q_j), with p_k = -p_max + k * dp.
struct PhaseLattice {
  Lattice q;
  Lattice p;  // period 2*p_max; interpreted as p in [-p_max, p_max)
  double p_max = 0.0;

  std::size_t n_q() const { return q.n_points; }
  std::size_t n_p() const { return p.n_points; }
  std::size_t size() const { return q.n_points * p.n_points; }
  double p_point(std::size_t k) const { return -p_max + p.spacing * static_cast<double>(k); }
  std::size_t flat(std::size_t k, std::size_t j) const { return k * q.n_points + j; }
};

PhaseLattice make_phase_lattice(std::size_t n_q, std::size_t n_p, double p_max);

/// Derivative along q (rows) of a p-major flattened phase-space sample.
CVector phase_derivative_q(const PhaseLattice& pl, const CVector& values);
/// Derivative along p (columns).
CVector phase_derivative_p(const PhaseLattice& pl, const CVector& values);

Complex phase_quadrature(const PhaseLattice& pl, const CVector& values);

}  // namespace blab
