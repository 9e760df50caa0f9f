#include "blab/kvn.hpp"

#include <cmath>

#include "blab/fft.hpp"

namespace blab {

PhaseWavefunction make_phase_wavefunction(const PhaseLattice& pl,
                                          CVector amplitudes) {
  if (static_cast<std::size_t>(amplitudes.size()) != pl.size())
    throw Error("make_phase_wavefunction: size mismatch");
  PhaseWavefunction psi;
  psi.lattice = pl;
  const double mass =
      std::real(phase_quadrature(pl, amplitudes.cwiseAbs2().cast<Complex>()));
  if (!(mass > 0.0)) throw Error("make_phase_wavefunction: zero norm");
  psi.amplitudes = amplitudes / std::sqrt(mass);
  psi.norm = 1.0;
  return psi;
}

struct Liouvillian::Impl {
  PhaseLattice phase;
  RVector f, df;   // over q
  RVector dg;      // Re g' over q (classical potential drift)
  RVector m_flat;  // p f'(q) + g'(q) over the full lattice
  std::vector<double> kq, kp;
  double bound = 0.0;
  std::unique_ptr<fft::ManyPlan> rows;  // transforms along q
  std::unique_ptr<fft::ManyPlan> cols;  // transforms along p

  CVector deriv_q(const CVector& x) const {
    CVector w = x;
    rows->forward(w.data());
    const std::size_t nq = phase.n_q(), np = phase.n_p();
    for (std::size_t k = 0; k < np; ++k)
      for (std::size_t m = 0; m < nq; ++m) w[k * nq + m] *= kI * kq[m];
    rows->inverse(w.data());
    return w;
  }

  CVector deriv_p(const CVector& x) const {
    CVector w = x;
    cols->forward(w.data());
    const std::size_t nq = phase.n_q(), np = phase.n_p();
    for (std::size_t m = 0; m < np; ++m)
      for (std::size_t j = 0; j < nq; ++j) w[m * nq + j] *= kI * kp[m];
    cols->inverse(w.data());
    return w;
  }

  CVector apply(const CVector& psi) const {
    const std::size_t nq = phase.n_q(), np = phase.n_p();
    // q part: -(i/2) (f d/dq + d/dq f .)
    CVector fpsi(psi.size());
    for (std::size_t k = 0; k < np; ++k)
      for (std::size_t j = 0; j < nq; ++j)
        fpsi[k * nq + j] = f[j] * psi[k * nq + j];
    CVector out = deriv_q(psi);
    for (std::size_t k = 0; k < np; ++k)
      for (std::size_t j = 0; j < nq; ++j)
        out[k * nq + j] = -0.5 * kI * (f[j] * out[k * nq + j]);
    const CVector dfq = deriv_q(fpsi);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += -0.5 * kI * dfq[i];
    // p part: +(i/2) (m d/dp + d/dp m .)
    const CVector dppsi = deriv_p(psi);
    CVector mpsi(psi.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i)
      mpsi[i] = m_flat[i] * psi[i];
    const CVector dpmpsi = deriv_p(mpsi);
    for (Eigen::Index i = 0; i < out.size(); ++i)
      out[i] += 0.5 * kI * (m_flat[i] * dppsi[i] + dpmpsi[i]);
    return out;
  }
};

Liouvillian::Liouvillian(const FlowField& field, const PhaseLattice& phase)
    : impl_(std::make_unique<Impl>()) {
  if (phase.n_q() < 8 || phase.n_p() < 8)
    throw Error("build_liouvillian: lattice too small (need n_q, n_p >= 8)");
  impl_->phase = phase;
  impl_->f = field.sample_f(phase.q);
  impl_->df = field.sample_df(phase.q);
  impl_->dg = RVector::Zero(phase.n_q());
  if (field.has_g()) {
    const CVector g = field.sample_g(phase.q);
    const CVector dg = spectral_derivative(phase.q, g);
    for (std::size_t j = 0; j < phase.n_q(); ++j) impl_->dg[j] = dg[j].real();
  }
  impl_->m_flat.resize(phase.size());
  for (std::size_t k = 0; k < phase.n_p(); ++k)
    for (std::size_t j = 0; j < phase.n_q(); ++j)
      impl_->m_flat[phase.flat(k, j)] =
          phase.p_point(k) * impl_->df[j] + impl_->dg[j];
  impl_->kq = wavenumbers(phase.q);
  impl_->kp = wavenumbers(phase.p);
  double kq_max = 0.0, kp_max = 0.0;
  for (double k : impl_->kq) kq_max = std::max(kq_max, std::abs(k));
  for (double k : impl_->kp) kp_max = std::max(kp_max, std::abs(k));
  impl_->bound = impl_->f.cwiseAbs().maxCoeff() * kq_max +
                 impl_->m_flat.cwiseAbs().maxCoeff() * kp_max;
  impl_->bound *= 1.02;
  impl_->rows = std::make_unique<fft::ManyPlan>(phase.n_q(), phase.n_p(), 1,
                                                phase.n_q());
  impl_->cols = std::make_unique<fft::ManyPlan>(phase.n_p(), phase.n_q(),
                                                phase.n_q(), 1);
}

Liouvillian::~Liouvillian() = default;
Liouvillian::Liouvillian(Liouvillian&&) noexcept = default;
Liouvillian& Liouvillian::operator=(Liouvillian&&) noexcept = default;

const PhaseLattice& Liouvillian::lattice() const { return impl_->phase; }

CVector Liouvillian::apply(const CVector& psi) const {
  if (static_cast<std::size_t>(psi.size()) != impl_->phase.size())
    throw Error("Liouvillian::apply: size mismatch");
  return impl_->apply(psi);
}

double Liouvillian::spectral_bound() const { return impl_->bound; }

double Liouvillian::f_at(std::size_t j) const { return impl_->f[j]; }

double Liouvillian::m_at(std::size_t k, std::size_t j) const {
  return impl_->m_flat[impl_->phase.flat(k, j)];
}

CMatrix Liouvillian::dense() const {
  const std::size_t n = impl_->phase.size();
  if (n > 4096)
    throw Error("Liouvillian::dense: refusing to materialize dimension > 4096");
  CMatrix d(n, n);
  CVector e = CVector::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 1.0;
    d.col(i) = impl_->apply(e);
    e[i] = 0.0;
  }
  return d;
}

OperatorMatrix Liouvillian::dense_operator() const {
  return make_operator(dense(), impl_->phase.size());
}

double Liouvillian::hermiticity_residual(int n_probes, std::uint64_t seed) const {
  const std::size_t n = impl_->phase.size();
  double worst = 0.0;
  for (int probe = 0; probe < n_probes; ++probe) {
    CVector u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = Complex(sample_uniform01(seed, 4 * (probe * n + i)) - 0.5,
                     sample_uniform01(seed, 4 * (probe * n + i) + 1) - 0.5);
      v[i] = Complex(sample_uniform01(seed, 4 * (probe * n + i) + 2) - 0.5,
                     sample_uniform01(seed, 4 * (probe * n + i) + 3) - 0.5);
    }
    u.normalize();
    v.normalize();
    const Complex a = u.dot(impl_->apply(v));
    const Complex b = impl_->apply(u).dot(v);
    worst = std::max(worst, std::abs(a - b));
  }
  return worst / impl_->bound;
}

Liouvillian build_liouvillian(const FlowField& field, const PhaseLattice& phase) {
  return Liouvillian(field, phase);
}

namespace {

/// J_0..J_m at x by Miller downward recurrence.
std::vector<double> bessel_j(int mmax, double x) {
  std::vector<double> j(mmax + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const int start = mmax + 16 + static_cast<int>(1.4 * std::sqrt(std::abs(x)) + 20);
  double jp = 0.0, jc = 1e-300;
  double norm = 0.0;
  std::vector<double> tail(mmax + 1, 0.0);
  for (int m = start; m >= 0; --m) {
    const double jm = 2.0 * (m + 1) / x * jc - jp;
    jp = jc;
    jc = jm;
    if (m <= mmax) tail[m] = jc;
    // Accumulate the normalization sum J0 + 2 sum J_{2k}.
    if (m % 2 == 0) norm += (m == 0 ? 1.0 : 2.0) * jc;
    if (std::abs(jc) > 1e250) {
      jc *= 1e-250;
      jp *= 1e-250;
      norm *= 1e-250;
      for (auto& tv : tail) tv *= 1e-250;
    }
  }
  for (int m = 0; m <= mmax; ++m) j[m] = tail[m] / norm;
  return j;
}

CVector chebyshev_exp_apply(const Liouvillian& l, const CVector& v, double dt) {
  // exp(-i L dt) with spectrum(L) in [-b, b]: sum_m (2-d_m0)(-i)^m J_m(b dt) T_m(L/b).
  const double b = l.spectral_bound();
  const double z = b * std::abs(dt);
  int mmax = static_cast<int>(z + 12.0 * std::cbrt(z + 1.0) + 30.0);
  const auto js = bessel_j(mmax, z);
  const double sgn = dt >= 0.0 ? 1.0 : -1.0;
  auto coeff = [&](int m) {
    Complex c = js[m] * (m == 0 ? 1.0 : 2.0);
    // (-i)^m, with sign flip of odd terms for negative dt
    switch (m % 4) {
      case 0: break;
      case 1: c *= -kI * sgn; break;
      case 2: c *= -1.0; break;
      case 3: c *= kI * sgn; break;
    }
    return c;
  };
  CVector tprev = v;
  CVector tcur = l.apply(v) / b;
  CVector acc = coeff(0) * tprev + coeff(1) * tcur;
  for (int m = 2; m <= mmax; ++m) {
    CVector tnext = 2.0 / b * l.apply(tcur) - tprev;
    acc += coeff(m) * tnext;
    tprev.swap(tcur);
    tcur.swap(tnext);
    if (std::abs(js[m]) < 1e-17 && static_cast<double>(m) > z) break;
  }
  return acc;
}

}  // namespace

PhaseWavefunction evolve_phase(const PhaseWavefunction& psi, const Liouvillian& l,
                               double t) {
  if (psi.lattice.size() != l.lattice().size())
    throw Error("evolve_phase: lattice mismatch");
  if (t == 0.0) return psi;
  const double norm_in = std::sqrt(std::real(
      phase_quadrature(psi.lattice, psi.amplitudes.cwiseAbs2().cast<Complex>())));
  // Slice so each Chebyshev call keeps b*dt moderate.
  const double b = l.spectral_bound();
  const int slices = std::max(1, static_cast<int>(std::ceil(b * std::abs(t) / 60.0)));
  const double dt = t / slices;
  CVector cur = psi.amplitudes;
  for (int s = 0; s < slices; ++s) cur = chebyshev_exp_apply(l, cur, dt);
  PhaseWavefunction out;
  out.lattice = psi.lattice;
  out.amplitudes = std::move(cur);
  out.norm = std::sqrt(std::real(
      phase_quadrature(out.lattice, out.amplitudes.cwiseAbs2().cast<Complex>())));
  if (std::abs(out.norm - norm_in) > 1e-8 * std::max(1.0, norm_in))
    throw Error("evolve_phase: norm drifted beyond 1e-8");
  return out;
}

RVector reduce_density(const PhaseWavefunction& psi) {
  const auto& pl = psi.lattice;
  RVector rho = RVector::Zero(pl.n_q());
  for (std::size_t k = 0; k < pl.n_p(); ++k)
    for (std::size_t j = 0; j < pl.n_q(); ++j)
      rho[j] += std::norm(psi.amplitudes[pl.flat(k, j)]);
  rho *= pl.p.spacing;
  return rho;
}

ConfigWavefunction reduce_wavefunction(const PhaseWavefunction& psi) {
  const auto& pl = psi.lattice;
  ConfigWavefunction out;
  out.lattice = pl.q;
  out.amplitudes = CVector::Zero(pl.n_q());
  for (std::size_t k = 0; k < pl.n_p(); ++k)
    for (std::size_t j = 0; j < pl.n_q(); ++j)
      out.amplitudes[j] += psi.amplitudes[pl.flat(k, j)];
  out.amplitudes *= pl.p.spacing;
  return out;
}

ConfigWavefunction evolve_config(const ConfigWavefunction& psi,
                                 const OperatorMatrix& h, double t) {
  if (psi.amplitudes.size() != h.m.rows())
    throw Error("evolve_config: dimension mismatch");
  ConfigWavefunction out;
  out.lattice = psi.lattice;
  out.amplitudes = evolution_operator(h, t) * psi.amplitudes;
  return out;
}

DensityEvolutionResult liouville_density_evolution(const RVector& rho0,
                                                   const Liouvillian& l,
                                                   double t, double fd_dt) {
  const auto& pl = l.lattice();
  if (static_cast<std::size_t>(rho0.size()) != pl.size())
    throw Error("liouville_density_evolution: size mismatch");
  if (rho0.minCoeff() < 0.0)
    throw Error("liouville_density_evolution: density must be nonnegative");
  const double mass_in = std::real(phase_quadrature(pl, rho0.cast<Complex>()));
  if (std::abs(mass_in - 1.0) > 1e-8)
    throw Error("liouville_density_evolution: density must have unit mass");
  CVector sqrt_rho(rho0.size());
  for (Eigen::Index i = 0; i < rho0.size(); ++i)
    sqrt_rho[i] = std::sqrt(rho0[i]);
  const PhaseWavefunction psi0 = make_phase_wavefunction(pl, sqrt_rho);
  const double mass0 = std::real(
      phase_quadrature(pl, psi0.amplitudes.cwiseAbs2().cast<Complex>()));

  const PhaseWavefunction psit = evolve_phase(psi0, l, t);
  DensityEvolutionResult r{};
  r.density = psit.amplitudes.cwiseAbs2();
  const double masst = std::real(
      phase_quadrature(pl, r.density.cast<Complex>()));
  r.mass_drift = std::abs(masst - mass0);

  // Fourth-order centered FD of d rho/dt against the classical Liouville
  // right side (the advection speeds amplify the truncation term, so the
  // second-order stencil is not accurate enough at dt = 1e-3).
  const PhaseWavefunction p1 = evolve_phase(psit, l, fd_dt);
  const PhaseWavefunction m1 = evolve_phase(psit, l, -fd_dt);
  const PhaseWavefunction p2 = evolve_phase(p1, l, fd_dt);
  const PhaseWavefunction m2 = evolve_phase(m1, l, -fd_dt);
  const RVector drho =
      (-p2.amplitudes.cwiseAbs2() + 8.0 * p1.amplitudes.cwiseAbs2() -
       8.0 * m1.amplitudes.cwiseAbs2() + m2.amplitudes.cwiseAbs2()) /
      (12.0 * fd_dt);
  const CVector rho_c = r.density.cast<Complex>();
  const CVector rq = phase_derivative_q(pl, rho_c);
  const CVector rp = phase_derivative_p(pl, rho_c);
  double resid = 0.0;
  double scale = std::max(r.density.maxCoeff(), 1e-300);
  // RHS of the classical Liouville equation: -f drho/dq + (p f' + g') drho/dp.
  for (std::size_t k = 0; k < pl.n_p(); ++k)
    for (std::size_t j = 0; j < pl.n_q(); ++j) {
      const std::size_t i = pl.flat(k, j);
      const double rhs = std::real(-l.f_at(j) * rq[i] + l.m_at(k, j) * rp[i]);
      resid = std::max(resid, std::abs(drho[i] - rhs) / scale);
    }
  r.liouville_residual = resid;
  return r;
}

CVector config_profile(const std::string& name,
                       const std::map<std::string, double>& params,
                       const Lattice& lat) {
  CVector phi(lat.n_points);
  if (name == "one_plus_eiq") {
    for (std::size_t j = 0; j < lat.n_points; ++j)
      phi[j] = 1.0 + std::exp(kI * lat.points[j]);
  } else if (name == "uniform") {
    phi = CVector::Constant(lat.n_points, 1.0);
  } else if (name == "von_mises") {
    const double kappa = params.count("kappa") ? params.at("kappa") : 4.0;
    const double mu = params.count("mu") ? params.at("mu") : kPi;
    for (std::size_t j = 0; j < lat.n_points; ++j)
      phi[j] = std::exp(kappa * (std::cos(lat.points[j] - mu) - 1.0));
  } else {
    throw Error("config_profile: unknown profile '" + name + "'");
  }
  const double mass = quadrature(lat, RVector(phi.cwiseAbs2()));
  return phi / std::sqrt(mass);
}

RVector momentum_profile(const std::string& name,
                         const std::map<std::string, double>& params,
                         const PhaseLattice& phase) {
  RVector chi = RVector::Zero(phase.n_p());
  if (name == "unit_box") {
    for (std::size_t k = 0; k < phase.n_p(); ++k) {
      const double p = phase.p_point(k);
      if (p >= 0.0 && p < 1.0) chi[k] = 1.0;
    }
  } else if (name == "box") {
    const double lo = params.count("lo") ? params.at("lo") : 0.0;
    const double hi = params.count("hi") ? params.at("hi") : 1.0;
    if (!(hi > lo)) throw Error("momentum_profile: box needs hi > lo");
    for (std::size_t k = 0; k < phase.n_p(); ++k) {
      const double p = phase.p_point(k);
      if (p >= lo && p < hi) chi[k] = 1.0;
    }
  } else if (name == "two_bump") {
    // Adversarial control with integral 0.5 but mismatched second moment:
    // a unit-height sliver plus a half-height box, so the |chi|^2 mass
    // (0.375) differs from (integral chi)^2 = 0.25 and the Born matching
    // precondition fails at t = 0.
    for (std::size_t k = 0; k < phase.n_p(); ++k) {
      const double p = phase.p_point(k);
      if (p >= 0.0 && p < 0.25) chi[k] = 1.0;
      if (p >= 1.0 && p < 1.5) chi[k] = 0.5;
    }
  } else {
    throw Error("momentum_profile: unknown profile '" + name + "'");
  }
  return chi;
}

BornReport born_check(const BornSetup& setup) {
  const PhaseLattice& pl = setup.phase;
  if (setup.times.empty() || setup.times.front() != 0.0)
    throw Error("born_check: time grid must start at 0");
  // Assemble the separable initial state.
  CVector amps(pl.size());
  for (std::size_t k = 0; k < pl.n_p(); ++k)
    for (std::size_t j = 0; j < pl.n_q(); ++j)
      amps[pl.flat(k, j)] = setup.chi[k] * setup.phi[j];
  const double mass =
      std::real(phase_quadrature(pl, amps.cwiseAbs2().cast<Complex>()));
  if (!(mass > 0.0)) throw Error("born_check: empty initial state");

  PhaseWavefunction psi;
  psi.lattice = pl;
  psi.amplitudes = amps;
  psi.norm = std::sqrt(mass);

  ConfigWavefunction psi_tilde;
  psi_tilde.lattice = pl.q;
  psi_tilde.amplitudes = (pl.p.spacing * setup.chi.sum()) * setup.phi;

  // Matched-data precondition: rho_tilde(0) = |psi_tilde(0)|^2.
  {
    const RVector rho0 = reduce_density(psi);
    const RVector b0 = psi_tilde.amplitudes.cwiseAbs2();
    const double dev0 = (rho0 - b0).cwiseAbs().maxCoeff();
    if (dev0 > 1e-10)
      throw Error(
          "born_check: initial data violates rho_tilde = |psi_tilde|^2 "
          "(deviation " + std::to_string(dev0) +
          "); the identification requires a chi with matching first and "
          "second moments, e.g. the unit box");
  }

  const Liouvillian liou = build_liouvillian(setup.field, pl);
  // Pipeline B operator: the hermitized drift form (PLeft + (i/2) f'),
  // i.e. the Weyl ordering; the identity needs the unitary half-density
  // transport on the amplitude side.
  const OperatorMatrix hb =
      build_hamiltonian(setup.field, pl.q, Ordering::Weyl);
  const Eigensystem hb_eig = hermitian_eigensystem(hb.m);

  BornReport report;
  report.passed = true;
  PhaseWavefunction cur = psi;
  CVector cur_b = psi_tilde.amplitudes;
  for (std::size_t step = 0; step < setup.times.size(); ++step) {
    if (step > 0) {
      const double dt = setup.times[step] - setup.times[step - 1];
      if (!(dt > 0.0)) throw Error("born_check: times must increase");
      cur = evolve_phase(cur, liou, dt);
      cur_b = evolution_from_eigensystem(hb_eig, dt) * cur_b;
    }
    const RVector rho_a = reduce_density(cur);
    const RVector rho_b = cur_b.cwiseAbs2();
    report.times.push_back(setup.times[step]);
    report.max_deviation.push_back((rho_a - rho_b).cwiseAbs().maxCoeff());
    report.norm_a.push_back(std::sqrt(std::real(
        phase_quadrature(pl, cur.amplitudes.cwiseAbs2().cast<Complex>()))));
    report.norm_b.push_back(std::sqrt(cur_b.squaredNorm() * pl.q.spacing));
    report.mass_a.push_back(quadrature(pl.q, rho_a));
    report.mass_b.push_back(quadrature(pl.q, rho_b));
    double bmass = 0.0;
    for (std::size_t j = 0; j < pl.n_q(); ++j) {
      for (std::size_t k : {std::size_t(0), std::size_t(1), pl.n_p() - 2,
                            pl.n_p() - 1})
        bmass += std::norm(cur.amplitudes[pl.flat(k, j)]);
    }
    bmass *= pl.p.spacing * pl.q.spacing;
    report.boundary_mass.push_back(bmass);
    if (bmass > 1e-10) report.boundary_warning = true;
    if (report.max_deviation.back() > setup.tolerance) report.passed = false;
  }
  return report;
}

}  // namespace blab
