#include "blab/emergent.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace blab {

SplitResiduals validate_split(const SplitPair& pair) {
  SplitResiduals r{};
  const double hscale = std::max(max_abs(pair.source.m), 1e-300);
  r.difference =
      max_abs(CMatrix(pair.h_plus.m - pair.h_minus.m - pair.source.m)) / hscale;
  const Eigensystem ep = hermitian_eigensystem(pair.h_plus.m);
  const Eigensystem em = hermitian_eigensystem(pair.h_minus.m);
  const double sp = std::max(max_abs(pair.h_plus.m), 1e-300);
  const double sm = std::max(max_abs(pair.h_minus.m), 1e-300);
  r.min_eig_plus = ep.values.minCoeff() / sp;
  r.min_eig_minus = em.values.minCoeff() / sm;
  r.comm_plus_minus =
      max_abs(CMatrix(pair.h_plus.m * pair.h_minus.m -
                      pair.h_minus.m * pair.h_plus.m)) / (sp * sm);
  const CMatrix rho_d = pair.rho.cast<Complex>().asDiagonal();
  const double sr = std::max(pair.rho.cwiseAbs().maxCoeff(), 1e-300);
  r.comm_rho_plus =
      max_abs(CMatrix(rho_d * pair.h_plus.m - pair.h_plus.m * rho_d)) / (sr * sp);
  r.comm_rho_minus =
      max_abs(CMatrix(rho_d * pair.h_minus.m - pair.h_minus.m * rho_d)) / (sr * sm);
  return r;
}

FlowInvariantCheck check_flow_invariant(const RVector& rho,
                                        const FlowField& field,
                                        const Lattice& lat) {
  if (static_cast<std::size_t>(rho.size()) != lat.n_points)
    throw Error("check_flow_invariant: rho length mismatch");
  if (rho.minCoeff() <= 0.0)
    throw Error("check_flow_invariant: rho must be positive");
  const CVector drho = spectral_derivative(lat, rho.cast<Complex>());
  const RVector f = field.sample_f(lat);
  double classical = 0.0;
  for (std::size_t j = 0; j < lat.n_points; ++j)
    classical = std::max(classical, std::abs(f[j] * drho[j]));
  classical /= rho.cwiseAbs().maxCoeff();

  const OperatorMatrix h = build_hamiltonian(field, lat, Ordering::Weyl);
  const CMatrix rho_d = rho.cast<Complex>().asDiagonal();
  const double opres = max_abs(CMatrix(rho_d * h.m - h.m * rho_d)) /
                       (rho.cwiseAbs().maxCoeff() * std::max(max_abs(h.m), 1e-300));
  return {classical, opres};
}

SplitPair split_hamiltonian(const OperatorMatrix& h, const RVector& rho,
                            const FlowField& field, const Lattice& lat) {
  if (!h.hermitian) throw Error("split_hamiltonian: H must be hermitian");
  if (static_cast<std::size_t>(rho.size()) != lat.n_points)
    throw Error("split_hamiltonian: rho length mismatch");
  if (rho.minCoeff() < 1e-8)
    throw Error("split_hamiltonian: rho must be >= 1e-8 everywhere");
  const FlowInvariantCheck inv = check_flow_invariant(rho, field, lat);
  if (inv.classical_residual > 1e-8)
    throw Error("split_hamiltonian: rho is not a flow invariant");

  const CMatrix rho_d = rho.cast<Complex>().asDiagonal();
  const CMatrix rho_inv =
      rho.cwiseInverse().cast<Complex>().asDiagonal();
  const CMatrix plus = CMatrix(rho_d + h.m);
  const CMatrix minus = CMatrix(rho_d - h.m);
  SplitPair pair;
  pair.h_plus = make_operator(CMatrix(plus * plus * rho_inv / 4.0), h.lattice_n);
  pair.h_minus = make_operator(CMatrix(minus * minus * rho_inv / 4.0), h.lattice_n);
  pair.rho = rho;
  pair.source = h;
  return pair;
}

SplitPair split_hamiltonian(const OperatorMatrix& h, double rho_const,
                            const FlowField& field, const Lattice& lat) {
  return split_hamiltonian(h, RVector::Constant(lat.n_points, rho_const), field,
                           lat);
}

Constraint build_constraint(const SplitPair& pair, double e_obs,
                            double e_planck) {
  if (!(e_obs > 0.0)) throw Error("build_constraint: e_obs must be positive");
  if (e_obs > e_planck)
    throw Error("build_constraint: e_obs must not exceed e_planck");
  Constraint c;
  c.e_obs = e_obs;
  c.e_planck = e_planck;
  c.prefactor = 1.0 - std::exp(-(e_planck - e_obs) / e_obs);
  c.phi = make_operator(CMatrix(c.prefactor * pair.h_minus.m),
                        pair.h_minus.lattice_n);
  return c;
}

PhysicalSubspace physical_subspace(const Constraint& c, double threshold) {
  const Eigensystem es = hermitian_eigensystem(c.phi.m);
  const double lmax = es.values.cwiseAbs().maxCoeff();
  const double cut = threshold * lmax;
  PhysicalSubspace sub;
  sub.singular_threshold = threshold;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] <= cut) keep.push_back(i);
  sub.dimension = keep.size();
  sub.basis.resize(es.vectors.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    sub.basis.col(static_cast<Eigen::Index>(i)) = es.vectors.col(keep[i]);
  return sub;
}

EmergentEvolveResult emergent_evolve(const CVector& state,
                                     const SplitPair& pair, double t) {
  if (state.size() != pair.h_plus.m.rows())
    throw Error("emergent_evolve: dimension mismatch");
  const double nrm = state.norm();
  if (!(nrm > 0.0)) throw Error("emergent_evolve: zero state");

  EmergentEvolveResult r{};
  r.residual_h_vs_hplus =
      ((pair.source.m - pair.h_plus.m) * state).norm() / nrm;
  const CMatrix rho_d = pair.rho.cast<Complex>().asDiagonal();
  r.residual_hplus_vs_rho = ((pair.h_plus.m - rho_d) * state).norm() / nrm;
  if (r.residual_h_vs_hplus > 1e-8 || r.residual_hplus_vs_rho > 1e-8)
    throw Error("emergent_evolve: state is not physical");

  const CMatrix u = evolution_operator(pair.h_plus, t);
  r.state = u * state;
  r.norm_drift = std::abs(r.state.norm() - nrm);
  return r;
}

namespace {

double classical_h(const FlowField& field, double p, double q) {
  double h = p * field.f(q);
  if (field.has_g()) h += field.g(q).real();
  return h;
}

double classical_dh_dq(const FlowField& field, double p, double q) {
  double d = p * field.df(q);
  if (field.has_g()) {
    // Re g' via a centered difference; catalog fields carry no classical g,
    // so this path only serves custom fields.
    const double eps = 1e-6;
    d += (field.g(q + eps).real() - field.g(q - eps).real()) / (2.0 * eps);
  }
  return d;
}

}  // namespace

PhasePoint gauge_orbit(const PhasePoint& point, GaugeGenerator generator,
                       const FlowField& field, double rho_const, double epsilon,
                       double p_max) {
  const double p = point.p, q = point.q;
  const double h = classical_h(field, p, q);
  const double dh_dp = field.f(q);
  const double dh_dq = classical_dh_dq(field, p, q);
  double dphi_dp = 0.0, dphi_dq = 0.0;
  if (generator == GaugeGenerator::PhiE) {
    const double common = -(rho_const - h) / (2.0 * rho_const);
    dphi_dp = common * dh_dp;
    dphi_dq = common * dh_dq;
  } else {
    dphi_dp = -0.5 * dh_dp;
    dphi_dq = -0.5 * dh_dq;
  }
  PhasePoint out;
  out.q = q + epsilon * dphi_dp;
  out.p = p - epsilon * dphi_dq;
  out.out_of_bounds = std::abs(out.p) >= p_max;
  return out;
}

double gauge_fixing_bracket(const PhasePoint& point, GaugeGenerator generator,
                            const FlowField& field, double rho_const,
                            const std::function<double(double, double)>& dchi_dp,
                            const std::function<double(double, double)>& dchi_dq) {
  const double p = point.p, q = point.q;
  const double h = classical_h(field, p, q);
  const double dh_dp = field.f(q);
  const double dh_dq = classical_dh_dq(field, p, q);
  double dphi_dp = 0.0, dphi_dq = 0.0;
  if (generator == GaugeGenerator::PhiE) {
    const double common = -(rho_const - h) / (2.0 * rho_const);
    dphi_dp = common * dh_dp;
    dphi_dq = common * dh_dq;
  } else {
    dphi_dp = -0.5 * dh_dp;
    dphi_dq = -0.5 * dh_dq;
  }
  return dphi_dq * dchi_dp(p, q) - dphi_dp * dchi_dq(p, q);
}

FirstClassCheck first_class_check(const SplitPair& pair, const Constraint& c,
                                  const FlowField& field,
                                  const PhaseLattice& phase) {
  FirstClassCheck r{};
  const CMatrix& h = pair.source.m;
  const CMatrix& phi = c.phi.m;
  const double sh = std::max(max_abs(h), 1e-300);
  const double sphi = std::max(max_abs(phi), 1e-300);
  r.operator_residual = max_abs(CMatrix(phi * h - h * phi)) / (sh * sphi);

  // Classical side with the smooth windowed-p surrogate H_w = p_w f(q).
  const std::size_t nq = phase.n_q(), np = phase.n_p();
  const PlateauWindow wp = plateau_window(phase.p, 3.0 * phase.p_max / 8.0);
  const RVector f = field.sample_f(phase.q);
  const CVector g = field.sample_g(phase.q);
  // rho sampled over q; constant rho is the accepted case.
  RVector rho_q = pair.rho;
  if (static_cast<std::size_t>(rho_q.size()) != nq)
    rho_q = RVector::Constant(nq, pair.rho.mean());

  CVector hw(phase.size()), phiw(phase.size());
  for (std::size_t k = 0; k < np; ++k) {
    const double pw = phase.p_point(k) * wp.values[k];
    for (std::size_t j = 0; j < nq; ++j) {
      const double hval = pw * f[j] + g[j].real();
      hw[phase.flat(k, j)] = hval;
      const double diff = rho_q[j] - hval;
      phiw[phase.flat(k, j)] =
          c.prefactor * diff * diff / (4.0 * rho_q[j]);
    }
  }
  // Interior band: rows where the p-window sits at its plateau. Everything
  // is smooth and periodic in q, so all q-columns count.
  const CVector bracket = poisson_bracket(phase, phiw, hw);
  double classical = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    if (!wp.plateau[k]) continue;
    for (std::size_t j = 0; j < nq; ++j)
      classical = std::max(classical, std::abs(bracket[phase.flat(k, j)]));
  }
  r.classical_residual = classical;
  return r;
}

std::string subspace_report_json(const SplitPair& pair, const Constraint& c,
                                 const PhysicalSubspace& sub) {
  nlohmann::ordered_json out;
  out["e_obs"] = c.e_obs;
  out["e_planck"] = c.e_planck;
  out["prefactor"] = c.prefactor;
  out["dimension"] = sub.dimension;
  const Spectrum sm = spectrum(pair.h_minus);
  std::vector<double> minus_eigs(sm.values.size());
  for (Eigen::Index i = 0; i < sm.values.size(); ++i)
    minus_eigs[static_cast<std::size_t>(i)] = sm.values[i].real();
  out["eigenvalues_of_H_minus"] = minus_eigs;
  std::vector<double> energies;
  for (std::size_t i = 0; i < sub.dimension; ++i) {
    const CVector v = sub.basis.col(static_cast<Eigen::Index>(i));
    energies.push_back(std::real(v.dot(pair.h_plus.m * v)));
  }
  out["physical_energies"] = energies;
  return out.dump(2);
}

}  // namespace blab
