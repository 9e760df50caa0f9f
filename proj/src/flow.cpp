#include "blab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace blab {

RVector FlowField::sample_f(const Lattice& lat) const {
  RVector out(lat.n_points);
  for (std::size_t j = 0; j < lat.n_points; ++j) out[j] = f(lat.points[j]);
  return out;
}

RVector FlowField::sample_df(const Lattice& lat) const {
  RVector out(lat.n_points);
  for (std::size_t j = 0; j < lat.n_points; ++j) out[j] = df(lat.points[j]);
  return out;
}

CVector FlowField::sample_g(const Lattice& lat) const {
  CVector out = CVector::Zero(lat.n_points);
  if (has_g())
    for (std::size_t j = 0; j < lat.n_points; ++j) out[j] = g(lat.points[j]);
  return out;
}

namespace {

double require_param(const std::map<std::string, double>& params,
                     const std::string& key, const std::string& field) {
  auto it = params.find(key);
  if (it == params.end())
    throw Error("catalog_field: " + field + " requires parameter '" + key + "'");
  return it->second;
}

}  // namespace

FlowField catalog_field(const std::string& name,
                        const std::map<std::string, double>& params) {
  FlowField field;
  field.name = name;
  if (name == "uniform") {
    const double omega = require_param(params, "omega", name);
    field.f = [omega](double) { return omega; };
    field.df = [](double) { return 0.0; };
  } else if (name == "shifted_sine") {
    const double a = require_param(params, "a", name);
    const double b = require_param(params, "b", name);
    if (!(std::abs(b) < a))
      throw Error("catalog_field: shifted_sine requires |b| < a");
    field.f = [a, b](double q) { return a + b * std::sin(q); };
    field.df = [b](double q) { return b * std::cos(q); };
  } else if (name == "double_well_drift") {
    const double a = require_param(params, "a", name);
    const double b = require_param(params, "b", name);
    if (!(std::abs(b) < a))
      throw Error("catalog_field: double_well_drift requires |b| < a");
    field.f = [a, b](double q) { return a + b * std::sin(2.0 * q); };
    field.df = [b](double q) { return 2.0 * b * std::cos(2.0 * q); };
  } else {
    throw Error("catalog_field: unknown field '" + name + "'");
  }
  return field;
}

namespace {

double rk4_step(const FlowField& field, double q, double h) {
  const double k1 = field.f(q);
  const double k2 = field.f(q + 0.5 * h * k1);
  const double k3 = field.f(q + 0.5 * h * k2);
  const double k4 = field.f(q + h * k3);
  return q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double wrap(double q, double period) {
  double w = std::fmod(q, period);
  if (w < 0.0) w += period;
  return w;
}

}  // namespace

Trajectory integrate_trajectory(const FlowField& field, double q0,
                                double t_final, double dt, double period) {
  if (!(dt > 0.0)) throw Error("integrate_trajectory: dt must be positive");
  if (t_final < 0.0) throw Error("integrate_trajectory: t_final must be >= 0");
  Trajectory traj;
  const std::size_t n_steps =
      t_final == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_final / dt - 1e-12));
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.unwrapped_states.reserve(n_steps + 1);
  double q = q0;
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(wrap(q, period));
  traj.unwrapped_states.push_back(q);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double h = std::min(dt, t_final - t);
    q = rk4_step(field, q, h);
    t = (s + 1 == n_steps) ? t_final : t + h;
    if (!std::isfinite(q)) {
      std::ostringstream msg;
      msg << "integrate_trajectory: non-finite state at t = " << t;
      throw Error(msg.str());
    }
    traj.times.push_back(t);
    traj.states.push_back(wrap(q, period));
    traj.unwrapped_states.push_back(q);
  }
  return traj;
}

double flow_map_unwrapped(const FlowField& field, double q0, double delta_t,
                          double dt) {
  if (!(dt > 0.0)) throw Error("flow_map: dt must be positive");
  if (delta_t == 0.0) return q0;
  const double span = std::abs(delta_t);
  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-12));
  const double h = delta_t / static_cast<double>(n_steps);
  double q = q0;
  for (std::size_t s = 0; s < n_steps; ++s) {
    q = rk4_step(field, q, h);
    if (!std::isfinite(q)) {
      std::ostringstream msg;
      msg << "flow_map: non-finite state at t = " << h * static_cast<double>(s + 1);
      throw Error(msg.str());
    }
  }
  return q;
}

double flow_map(const FlowField& field, double q0, double delta_t, double dt,
                double period) {
  if (delta_t < 0.0) throw Error("flow_map: delta_t must be >= 0");
  return wrap(flow_map_unwrapped(field, q0, delta_t, dt), period);
}

CVector poisson_bracket(const PhaseLattice& pl, const CVector& a,
                        const CVector& b) {
  if (a.size() != b.size() ||
      static_cast<std::size_t>(a.size()) != pl.size())
    throw Error("poisson_bracket: lattice mismatch");
  const CVector aq = phase_derivative_q(pl, a);
  const CVector ap = phase_derivative_p(pl, a);
  const CVector bq = phase_derivative_q(pl, b);
  const CVector bp = phase_derivative_p(pl, b);
  return aq.cwiseProduct(bp) - ap.cwiseProduct(bq);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

double sample_uniform01(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t z = splitmix64(seed + index * 0x9E3779B97F4A7C15ULL);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

RVector ensemble_sample(const FlowField& field, const Lattice& lat,
                        const RVector& density0, std::size_t n_samples,
                        double t_final, std::uint64_t seed, double dt,
                        unsigned max_threads) {
  if (static_cast<std::size_t>(density0.size()) != lat.n_points)
    throw Error("ensemble_sample: density length mismatch");
  if (density0.minCoeff() < 0.0)
    throw Error("ensemble_sample: density must be nonnegative");
  const double mass = quadrature(lat, density0);
  if (!(mass > 0.0)) throw Error("ensemble_sample: density has zero mass");
  if (std::abs(mass - 1.0) > 1e-8)
    throw Error("ensemble_sample: density must integrate to 1");
  if (n_samples < 1000) throw Error("ensemble_sample: n_samples must be >= 1000");

  const std::size_t n = lat.n_points;
  // CDF over cells centered on the sites.
  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    cdf[j + 1] = cdf[j] + density0[j] * lat.spacing / mass;
  cdf[n] = 1.0;

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned n_workers = max_threads == 0 ? hw : std::min(hw, max_threads);
  n_workers = std::max(1u, std::min<unsigned>(n_workers, 16));
  if (!field.parallel_safe) n_workers = 1;

  std::vector<std::vector<std::uint64_t>> counts(
      n_workers, std::vector<std::uint64_t>(n, 0));
  std::vector<std::string> errors(n_workers);

  auto worker = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < n_samples; i += n_workers) {
        const double u = sample_uniform01(seed, i);
        const std::size_t cell =
            static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                     cdf.begin()) - 1;
        const std::size_t j = std::min(cell, n - 1);
        const double within = (u - cdf[j]) / std::max(cdf[j + 1] - cdf[j], 1e-300);
        const double q0 = lat.points[j] + (within - 0.5) * lat.spacing;
        const double q1 = flow_map(field, q0, t_final, dt, lat.period);
        const auto site = static_cast<std::size_t>(
            std::llround(q1 / lat.spacing)) % n;
        ++counts[w][site];
      }
    } catch (const std::exception& e) {
      errors[w] = e.what();
    }
  };

  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker, w);
  worker(0);
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (!err.empty()) throw Error("ensemble_sample: " + err);

  RVector density = RVector::Zero(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t total = 0;
    for (unsigned w = 0; w < n_workers; ++w) total += counts[w][j];
    density[j] = static_cast<double>(total) /
                 (static_cast<double>(n_samples) * lat.spacing);
  }
  return density;
}

namespace {

RVector von_mises_bump(const Lattice& lat, double center, double kappa) {
  RVector b(lat.n_points);
  for (std::size_t j = 0; j < lat.n_points; ++j) {
    const double theta = kTwoPi * (lat.points[j] - center) / lat.period;
    b[j] = std::exp(kappa * (std::cos(theta) - 1.0));
  }
  b /= b.sum() * lat.spacing;  // unit mass under the lattice quadrature
  return b;
}

double default_kappa(const Lattice& lat) {
  return std::max(8.0, static_cast<double>(lat.n_points) / 4.0);
}

}  // namespace

CoordinateSurrogate coordinate_surrogate(const Lattice& lat, double offset,
                                         double kappa) {
  if (kappa <= 0.0) kappa = default_kappa(lat);
  const std::size_t n = lat.n_points;
  const RVector bump = von_mises_bump(lat, 0.0, kappa);
  // x_s = x - period * AntiDeriv(bump); built spectrally so that the slope is
  // exactly 1 - period*bump at the nodes.
  CVector rhs(n);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = bump[j] - 1.0 / lat.period;
  const CVector anti = spectral_antiderivative(lat, rhs);
  CoordinateSurrogate s;
  s.values.resize(n);
  const std::size_t mid = n / 2;
  const double shift =
      lat.points[mid] - (-lat.period * std::real(anti[mid]));
  for (std::size_t j = 0; j < n; ++j)
    s.values[j] = -lat.period * std::real(anti[j]) + shift + offset;
  // Slope deviates from 1 by period*bump; flag sites where that is ~0.
  s.interior.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    s.interior[j] = bump[j] * lat.period < 1e-11;
  return s;
}

PlateauWindow plateau_window(const Lattice& lat, double half_width,
                             double kappa) {
  if (!(half_width > 0.0) || half_width >= lat.period / 2.0)
    throw Error("plateau_window: half_width must be in (0, period/2)");
  // Sharper default than the surrogate bump: the window's derivative gets
  // re-amplified by the coordinate factor, so its transitions must clear the
  // plateau within a few sites.
  if (kappa <= 0.0) kappa = std::max(8.0, static_cast<double>(lat.n_points) / 2.0);
  const std::size_t n = lat.n_points;
  const double center = lat.period / 2.0;
  const RVector up = von_mises_bump(lat, center - half_width, kappa);
  const RVector down = von_mises_bump(lat, center + half_width, kappa);
  CVector rhs(n);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = up[j] - down[j];
  const CVector anti = spectral_antiderivative(lat, rhs);
  PlateauWindow w;
  w.values.resize(n);
  const std::size_t mid = n / 2;
  const double shift = 1.0 - std::real(anti[mid]);
  for (std::size_t j = 0; j < n; ++j)
    w.values[j] = std::real(anti[j]) + shift;
  // Plateau: window at 1 and flat (both to ~1e-9), judged on the values and
  // the bump densities that make up its slope.
  w.plateau.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    w.plateau[j] = std::abs(w.values[j] - 1.0) < 1e-9 &&
                   std::abs(up[j] - down[j]) * lat.period < 1e-9;
  return w;
}

}  // namespace blab
