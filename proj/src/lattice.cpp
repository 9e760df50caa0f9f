#include "blab/lattice.hpp"

#include "blab/fft.hpp"

namespace blab {

Lattice make_lattice(std::size_t n_points, double period) {
  if (n_points % 2 != 0) throw Error("make_lattice: n_points must be even");
  if (n_points < 4) throw Error("make_lattice: n_points must be >= 4");
  if (!(period > 0.0)) throw Error("make_lattice: period must be positive");
  Lattice lat;
  lat.n_points = n_points;
  lat.period = period;
  lat.spacing = period / static_cast<double>(n_points);
  lat.points.resize(n_points);
  for (std::size_t j = 0; j < n_points; ++j)
    lat.points[j] = lat.spacing * static_cast<double>(j);
  return lat;
}

long wavenumber_index(std::size_t m, std::size_t n) {
  return m < n / 2 ? static_cast<long>(m)
                   : static_cast<long>(m) - static_cast<long>(n);
}

std::vector<double> wavenumbers(const Lattice& lat) {
  std::vector<double> k(lat.n_points);
  const double base = kTwoPi / lat.period;
  for (std::size_t m = 0; m < lat.n_points; ++m)
    k[m] = base * static_cast<double>(wavenumber_index(m, lat.n_points));
  return k;
}

CVector spectral_derivative(const Lattice& lat, const CVector& values) {
  if (static_cast<std::size_t>(values.size()) != lat.n_points)
    throw Error("spectral_derivative: length mismatch");
  CVector hat(values.size());
  fft::forward(values, hat);
  const auto k = wavenumbers(lat);
  for (std::size_t m = 0; m < lat.n_points; ++m) hat[m] *= kI * k[m];
  CVector out(values.size());
  fft::inverse(hat, out);
  return out;
}

CVector spectral_antiderivative(const Lattice& lat, const CVector& values) {
  if (static_cast<std::size_t>(values.size()) != lat.n_points)
    throw Error("spectral_antiderivative: length mismatch");
  CVector hat(values.size());
  fft::forward(values, hat);
  const auto k = wavenumbers(lat);
  hat[0] = 0.0;
  for (std::size_t m = 1; m < lat.n_points; ++m) hat[m] /= kI * k[m];
  CVector out(values.size());
  fft::inverse(hat, out);
  return out;
}

CMatrix derivative_matrix(const Lattice& lat) {
  const std::size_t n = lat.n_points;
  CMatrix d(n, n);
  CVector e = CVector::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 1.0;
    d.col(i) = spectral_derivative(lat, e);
    e[i] = 0.0;
  }
  return d;
}

Complex quadrature(const Lattice& lat, const CVector& values) {
  if (static_cast<std::size_t>(values.size()) != lat.n_points)
    throw Error("quadrature: length mismatch");
  return lat.spacing * values.sum();
}

double quadrature(const Lattice& lat, const RVector& values) {
  if (static_cast<std::size_t>(values.size()) != lat.n_points)
    throw Error("quadrature: length mismatch");
  return lat.spacing * values.sum();
}

PhaseLattice make_phase_lattice(std::size_t n_q, std::size_t n_p, double p_max) {
  if (!(p_max > 0.0)) throw Error("make_phase_lattice: p_max must be positive");
  PhaseLattice pl;
  pl.q = make_lattice(n_q, kTwoPi);
  pl.p = make_lattice(n_p, 2.0 * p_max);
  pl.p_max = p_max;
  return pl;
}

namespace {

CVector phase_axis_derivative(const PhaseLattice& pl, const CVector& values, bool along_q) {
  if (static_cast<std::size_t>(values.size()) != pl.size())
    throw Error("phase derivative: length mismatch");
  const Lattice& axis = along_q ? pl.q : pl.p;
  const std::size_t n = axis.n_points;
  const std::size_t lines = along_q ? pl.n_p() : pl.n_q();
  const std::size_t stride = along_q ? 1 : pl.n_q();
  const std::size_t dist = along_q ? pl.n_q() : 1;
  CVector work = values;
  fft::ManyPlan plan(n, lines, stride, dist);
  plan.forward(work.data());
  const auto k = wavenumbers(axis);
  for (std::size_t line = 0; line < lines; ++line)
    for (std::size_t m = 0; m < n; ++m)
      work[line * dist + m * stride] *= kI * k[m];
  plan.inverse(work.data());
  return work;
}

}  // namespace

CVector phase_derivative_q(const PhaseLattice& pl, const CVector& values) {
  return phase_axis_derivative(pl, values, true);
}

CVector phase_derivative_p(const PhaseLattice& pl, const CVector& values) {
  return phase_axis_derivative(pl, values, false);
}

Complex phase_quadrature(const PhaseLattice& pl, const CVector& values) {
  if (static_cast<std::size_t>(values.size()) != pl.size())
    throw Error("phase_quadrature: length mismatch");
  return pl.q.spacing * pl.p.spacing * values.sum();
}

}  // namespace blab
