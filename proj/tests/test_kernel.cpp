#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "blab/kernel.hpp"

using namespace blab;

namespace {

FlowField rotor() { return catalog_field("uniform", {{"omega", 1.0}}); }
FlowField sine_field() {
  return catalog_field("shifted_sine", {{"a", 1.5}, {"b", 1.0}});
}

RVector cosine_density(const Lattice& lat) {
  RVector rho(lat.n_points);
  for (std::size_t j = 0; j < lat.n_points; ++j)
    rho[j] = (1.0 + std::cos(lat.points[j])) / kTwoPi;
  return rho;
}

}  // namespace

TEST_CASE("resonant nearest kernel is an exact cyclic permutation") {
  const Lattice lat = make_lattice(32);
  const TransportKernel k = build_transport_kernel(
      rotor(), lat, lat.spacing, InterpOrder::Nearest);
  const RMatrix m = k.dense();
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 32; ++j)
      CHECK(m(j, i) == ((j == (i + 1) % 32) ? 1.0 : 0.0));
}

TEST_CASE("zero-time kernel is the identity") {
  const Lattice lat = make_lattice(16);
  for (InterpOrder ord : {InterpOrder::Nearest, InterpOrder::Linear}) {
    const TransportKernel k = build_transport_kernel(sine_field(), lat, 0.0, ord);
    CHECK(max_abs(CMatrix(k.dense().cast<Complex>() -
                          CMatrix::Identity(16, 16))) == 0.0);
  }
}

TEST_CASE("kernel columns are stochastic and support is local") {
  const Lattice lat = make_lattice(64);
  const TransportKernel k =
      build_transport_kernel(sine_field(), lat, 0.1, InterpOrder::Linear);
  const RMatrix m = k.dense();
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(m.col(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
    // Support: only the two stencil neighbors of the flow-map image.
    int nonzero = 0;
    for (std::size_t j = 0; j < 64; ++j)
      if (m(j, i) != 0.0) ++nonzero;
    CHECK(nonzero <= 2);
  }
  // Mass preservation under application.
  const RVector rho = cosine_density(lat);
  CHECK(std::abs(quadrature(lat, RVector(k.apply(rho))) -
                 quadrature(lat, rho)) <= 1e-12);
}

TEST_CASE("propagate_both: permutation kernels preserve the duality exactly") {
  const Lattice lat = make_lattice(32);
  const TransportKernel k = build_transport_kernel(
      rotor(), lat, 2.0 * lat.spacing, InterpOrder::Nearest);
  const CVector phi = config_profile("one_plus_eiq", {}, lat);
  const RVector rho = phi.cwiseAbs2();
  const PropagatePair out = propagate_both(k, ConfigWavefunction{lat, phi}, rho);
  CHECK(max_abs(CVector((out.psi.amplitudes.cwiseAbs2() - out.rho)
                            .cast<Complex>())) == 0.0);
}

TEST_CASE("propagate_both: delta at site 3 hops to site 5") {
  const Lattice lat = make_lattice(32);
  const TransportKernel k = build_transport_kernel(
      rotor(), lat, 2.0 * lat.spacing, InterpOrder::Nearest);
  CVector psi = CVector::Zero(32);
  psi[3] = 1.0;
  RVector rho = RVector::Zero(32);
  rho[3] = 1.0;
  const PropagatePair out = propagate_both(k, ConfigWavefunction{lat, psi}, rho);
  CHECK(std::abs(out.psi.amplitudes[5] - 1.0) == 0.0);
  CHECK(out.rho[5] == 1.0);
  CHECK(out.rho.sum() == 1.0);
}

TEST_CASE("linear-kernel duality error shrinks ~4x with dt ~ dq^2 refinement") {
  // With dt scaled as dq^2 both the Jacobian mismatch and the deposition
  // ripple scale quadratically; pilot values 5.4e-2 / 1.55e-2 / 4.0e-3.
  double prev = 0.0;
  std::size_t idx = 0;
  for (std::size_t n : {std::size_t(64), std::size_t(128), std::size_t(256)}) {
    const Lattice lat = make_lattice(n);
    const double dt = 0.2 * std::pow(64.0 / static_cast<double>(n), 2);
    const TransportKernel k =
        build_transport_kernel(sine_field(), lat, dt, InterpOrder::Linear);
    const CVector phi = config_profile("one_plus_eiq", {}, lat);
    const RVector rho = phi.cwiseAbs2();
    const PropagatePair out =
        propagate_both(k, ConfigWavefunction{lat, phi}, rho);
    const double err =
        (out.psi.amplitudes.cwiseAbs2() - out.rho).cwiseAbs().maxCoeff();
    if (idx > 0) CHECK(err <= prev / 2.0);
    prev = err;
    ++idx;
  }
  CHECK(prev <= 5e-3);
}

TEST_CASE("symplectic action: zero on a static zero-energy path") {
  FlowField none;
  none.name = "zero";
  none.f = [](double) { return 0.0; };
  none.df = [](double) { return 0.0; };
  std::vector<double> p(16, 0.0), q(16, 1.0);
  CHECK(symplectic_action(p, q, 0.1, none) == 0.0);
}

TEST_CASE("symplectic action: kinetic term measures the loop area") {
  // Circle of radius r: action = integral of (p qdot - q pdot)/2 dt = pi r^2
  // (signed); the field is zero so H contributes nothing.
  FlowField none;
  none.name = "zero";
  none.f = [](double) { return 0.0; };
  none.df = [](double) { return 0.0; };
  const int n = 400;
  const double r = 0.8;
  std::vector<double> p(n + 1), q(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double th = kTwoPi * i / n;
    p[i] = r * std::cos(th);
    q[i] = 2.0 + r * std::sin(th);
  }
  const double action = symplectic_action(p, q, 1.0 / n, none);
  CHECK(action == doctest::Approx(kPi * r * r).epsilon(1e-3));
}

TEST_CASE("symplectic action: stationary on classical solutions") {
  // Classical pair: q from the flow, p solving pdot = -p f'(q), starting on
  // the H = const surface. First variation under a smooth endpoint-fixed
  // perturbation must vanish to first order.
  const FlowField f = sine_field();
  const int n = 200;
  const double t_final = 1.0, dt = t_final / n;
  std::vector<double> p(n + 1), q(n + 1);
  q[0] = 0.3;
  p[0] = 2.0 / f.f(q[0]);
  for (int i = 0; i < n; ++i) {
    // RK4 on the joint system (q autonomous, p linear along it).
    auto pdot = [&](double pp, double qq) { return -pp * f.df(qq); };
    const double k1q = f.f(q[i]), k1p = pdot(p[i], q[i]);
    const double k2q = f.f(q[i] + 0.5 * dt * k1q),
                 k2p = pdot(p[i] + 0.5 * dt * k1p, q[i] + 0.5 * dt * k1q);
    const double k3q = f.f(q[i] + 0.5 * dt * k2q),
                 k3p = pdot(p[i] + 0.5 * dt * k2p, q[i] + 0.5 * dt * k2q);
    const double k4q = f.f(q[i] + dt * k3q),
                 k4p = pdot(p[i] + dt * k3p, q[i] + dt * k3q);
    q[i + 1] = q[i] + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    p[i + 1] = p[i] + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
  }
  const double s0 = symplectic_action(p, q, dt, f);

  // Smooth perturbation vanishing at the endpoints, in both components.
  const double eps = 1e-5;
  std::vector<double> pp = p, qq = q, pm = p, qm = q;
  for (int i = 0; i <= n; ++i) {
    const double bump = std::sin(kPi * i / n);
    const double dq = bump * bump * std::cos(3.0 * kPi * i / n);
    const double dp = bump * bump * std::sin(2.0 * kPi * i / n);
    pp[i] += eps * dp;
    qq[i] += eps * dq;
    pm[i] -= eps * dp;
    qm[i] -= eps * dq;
  }
  const double splus = symplectic_action(pp, qq, dt, f);
  const double sminus = symplectic_action(pm, qm, dt, f);
  const double first_variation = (splus - sminus) / (2.0 * eps);
  CHECK(std::abs(first_variation) <= 1e-4);
  CHECK(std::abs(splus - s0) <= 1e-4);
}

TEST_CASE("symplectic action rejects ragged input") {
  FlowField none;
  none.f = [](double) { return 0.0; };
  none.df = [](double) { return 0.0; };
  std::vector<double> p(5, 0.0), q(4, 0.0);
  CHECK_THROWS_AS(symplectic_action(p, q, 0.1, none), Error);
  std::vector<double> p2(2, 0.0), q2(2, 0.0);
  CHECK_THROWS_AS(symplectic_action(p2, q2, 0.1, none), Error);
}

TEST_CASE("kernel vs spectral: rotor resonant steps are exact") {
  const Lattice lat = make_lattice(32);
  const RVector rho = cosine_density(lat);
  const KernelCompareReport r = kernel_vs_spectral(
      rotor(), lat, lat.spacing, 8, rho, InterpOrder::Nearest, 4.0);
  CHECK(r.cumulative_l1 <= 1e-10);
  CHECK(r.mass_drift <= 1e-12);
}

TEST_CASE("kernel exports through the BLAB container") {
  const Lattice lat = make_lattice(16);
  const TransportKernel k =
      build_transport_kernel(sine_field(), lat, 0.1, InterpOrder::Linear);
  const auto dir = std::filesystem::temp_directory_path() / "blab_kernel";
  std::filesystem::create_directories(dir);
  save_kernel_blab(dir / "k.blab", k);
  const CMatrix back = load_matrix_blab(dir / "k.blab");
  CHECK(max_abs(CMatrix(back - k.dense().cast<Complex>())) == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("kernel vs spectral: nonlinear field, 10 steps of 0.05 at N=128") {
  const Lattice lat = make_lattice(128);
  const RVector rho = cosine_density(lat);
  const KernelCompareReport r = kernel_vs_spectral(
      sine_field(), lat, 0.05, 10, rho, InterpOrder::Linear, 8.0);
  // Pilot: cumulative L1 ~ 1.0e-2.
  CHECK(r.cumulative_l1 <= 2e-2);
  CHECK(r.mass_drift <= 1e-8);
  CHECK(static_cast<int>(r.l1.size()) == 10);
}

TEST_CASE("kernel semigroup: exact for resonant permutations, bounded for linear") {
  const Lattice lat = make_lattice(128);
  // Nearest, f = const, resonant steps: K(dq) K(dq) == K(2 dq) exactly.
  const TransportKernel k1 = build_transport_kernel(
      rotor(), lat, lat.spacing, InterpOrder::Nearest);
  const TransportKernel k2 = build_transport_kernel(
      rotor(), lat, 2.0 * lat.spacing, InterpOrder::Nearest);
  const RVector rho = cosine_density(lat);
  CHECK((k1.apply(RVector(k1.apply(rho))) - k2.apply(rho))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Linear on the nonlinear field: composition differs from the single long
  // step by the deposition ripple, O(dt) in value (measured ~5e-2 at dt=0.1).
  const TransportKernel ka =
      build_transport_kernel(sine_field(), lat, 0.05, InterpOrder::Linear);
  const TransportKernel kb =
      build_transport_kernel(sine_field(), lat, 0.1, InterpOrder::Linear);
  const double gap =
      (ka.apply(RVector(ka.apply(rho))) - kb.apply(rho)).cwiseAbs().maxCoeff();
  CHECK(gap <= 1e-1);
}

TEST_CASE("single linear step tracks the spectral density at the ripple scale") {
  // Unit-mass site deposition carries an O(dt f'') ripple that does not
  // shrink with the grid; measured ~3e-2 for dt = 0.1 across N = 64..256.
  const Lattice lat = make_lattice(128);
  const RVector rho = cosine_density(lat);
  const KernelCompareReport r = kernel_vs_spectral(
      sine_field(), lat, 0.1, 1, rho, InterpOrder::Linear, 8.0);
  CHECK(r.linf[0] <= 5e-2);
  CHECK(r.l1[0] <= 2e-2);
}
