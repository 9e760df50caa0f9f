#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "blab/op.hpp"

using namespace blab;

namespace {

FlowField rotor() { return catalog_field("uniform", {{"omega", 1.0}}); }
FlowField sine_field() {
  return catalog_field("shifted_sine", {{"a", 1.5}, {"b", 1.0}});
}

}  // namespace

TEST_CASE("rotor Weyl Hamiltonian is the momentum operator") {
  const Lattice lat = make_lattice(8);
  const OperatorMatrix h = build_hamiltonian(rotor(), lat, Ordering::Weyl);
  const OperatorMatrix p = momentum_operator(lat);
  CHECK(h.hermitian);
  CHECK(max_abs(CMatrix(h.m - p.m)) <= 1e-12);
  const Spectrum s = spectrum(h);
  for (int j = 0; j < 8; ++j)
    CHECK(s.values[j].real() == doctest::Approx(double(j - 4)).epsilon(1e-12));
}

TEST_CASE("rotor PLeft with g = 0 is hermitian") {
  const Lattice lat = make_lattice(8);
  const OperatorMatrix h = build_hamiltonian(rotor(), lat, Ordering::PLeft);
  CHECK(h.hermitian);
}

TEST_CASE("Weyl equals PLeft plus the hermitizing g on resolved modes") {
  const Lattice lat = make_lattice(64);
  const FlowField f = sine_field();
  const OperatorMatrix weyl = build_hamiltonian(f, lat, Ordering::Weyl);
  CHECK(weyl.hermitian);
  CHECK(max_abs(CMatrix(weyl.m - weyl.m.adjoint())) <= 1e-12 * max_abs(weyl.m));

  // The ordering identity p f = (p f + f p)/2 + [p, f]/2 holds on the
  // resolved band; at the Nyquist wrap the discrete product p*diag(f) picks
  // up O(N) alias entries that no diagonal g can cancel, so the raw matrices
  // differ there and PLeft + g is not hermitian as a full matrix.
  const CVector g = hermitize_g(f, lat);
  const OperatorMatrix pleft_g = build_hamiltonian_pleft_with_g(f, lat, g);
  const CMatrix gap = weyl.m - pleft_g.m;
  const CMatrix herm_defect = pleft_g.m - pleft_g.m.adjoint();
  for (int k = -16; k <= 16; ++k) {
    CVector probe(64);
    for (std::size_t j = 0; j < 64; ++j)
      probe[j] = std::exp(kI * (double(k) * lat.points[j]));
    probe /= probe.norm();
    CHECK((gap * probe).norm() <= 1e-10 * max_abs(weyl.m));
    CHECK((herm_defect * probe).norm() <= 1e-10 * max_abs(weyl.m));
  }

  // PLeft without g is not hermitian for a nonconstant f.
  const OperatorMatrix pleft = build_hamiltonian(f, lat, Ordering::PLeft);
  CHECK_FALSE(pleft.hermitian);
}

TEST_CASE("hermitize_g values") {
  const Lattice lat = make_lattice(32);
  const CVector g0 = hermitize_g(rotor(), lat);
  CHECK(max_abs(g0) <= 1e-13);

  const CVector g = hermitize_g(sine_field(), lat);
  for (std::size_t j = 0; j < 32; ++j) {
    CHECK(g[j].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g[j].imag() ==
          doctest::Approx(0.5 * std::cos(lat.points[j])).epsilon(1e-12));
  }
}

TEST_CASE("g_dagger - g realizes [p, f] on resolved modes") {
  // The identity holds on the resolved band; the raw matrices differ at the
  // Nyquist wrap where discrete multiplication aliases the band edge.
  const Lattice lat = make_lattice(32);
  const FlowField f = sine_field();
  const CVector g = hermitize_g(f, lat);
  const CMatrix gd =
      CMatrix(g.conjugate().asDiagonal()) - CMatrix(g.asDiagonal());
  const CMatrix p = -kI * derivative_matrix(lat);
  const CMatrix fd = f.sample_f(lat).cast<Complex>().asDiagonal();
  const CMatrix comm = p * fd - fd * p;
  for (int k = -8; k <= 8; ++k) {
    CVector probe(32);
    for (std::size_t j = 0; j < 32; ++j)
      probe[j] = std::exp(kI * (double(k) * lat.points[j]));
    probe /= probe.norm();
    CHECK(((gd - comm) * probe).norm() <= 1e-10);
  }
}

TEST_CASE("spectrum of an explicit diagonal") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  d(2, 2) = 3.0;
  const Spectrum s = spectrum(make_operator(d, 3));
  CHECK(s.values[0].real() == doctest::Approx(1.0));
  CHECK(s.values[1].real() == doctest::Approx(2.0));
  CHECK(s.values[2].real() == doctest::Approx(3.0));
}

TEST_CASE("spectrum rejects non-hermitian operators") {
  const Lattice lat = make_lattice(16);
  const OperatorMatrix pleft =
      build_hamiltonian(sine_field(), lat, Ordering::PLeft);
  CHECK_THROWS_AS(spectrum(pleft), Error);
}

TEST_CASE("spectrum reconstruction and orthonormality") {
  const Lattice lat = make_lattice(32);
  const OperatorMatrix h = build_hamiltonian(sine_field(), lat, Ordering::Weyl);
  const Spectrum s = spectrum(h);
  CMatrix lam = CMatrix::Zero(32, 32);
  for (int i = 0; i < 32; ++i) lam(i, i) = s.values[i];
  CHECK(max_abs(CMatrix(s.vectors * lam * s.vectors.adjoint() - h.m)) <=
        1e-8 * max_abs(h.m));
  CHECK(max_abs(CMatrix(s.vectors.adjoint() * s.vectors -
                        CMatrix::Identity(32, 32))) <= 1e-10);
}

TEST_CASE("Weyl spectrum converges under grid refinement") {
  // The closed flow has rotation frequency Omega = sqrt(a^2 - b^2); the Weyl
  // operator's spectrum approaches Omega * Z. Compare central eigenvalues
  // across a grid doubling.
  const Spectrum s64 = spectrum(
      build_hamiltonian(sine_field(), make_lattice(64), Ordering::Weyl));
  const Spectrum s128 = spectrum(
      build_hamiltonian(sine_field(), make_lattice(128), Ordering::Weyl));
  for (int offset = -4; offset <= 4; ++offset) {
    const double a = s64.values[32 + offset].real();
    const double b = s128.values[64 + offset].real();
    CHECK(std::abs(a - b) <= 1e-6);
    const double omega = std::sqrt(1.5 * 1.5 - 1.0);
    CHECK(std::abs(a - omega * std::round(a / omega)) <= 1e-6);
  }
}

TEST_CASE("unitarity of evolution operators for catalog fields") {
  const Lattice lat = make_lattice(32);
  for (const auto& name : {"uniform", "shifted_sine", "double_well_drift"}) {
    std::map<std::string, double> params;
    if (std::string(name) == "uniform")
      params = {{"omega", 1.0}};
    else
      params = {{"a", 1.5}, {"b", 1.0}};
    const OperatorMatrix h =
        build_hamiltonian(catalog_field(name, params), lat, Ordering::Weyl);
    const CMatrix u = evolution_operator(h, 0.37);
    CHECK(max_abs(CMatrix(u.adjoint() * u - CMatrix::Identity(32, 32))) <=
          1e-10);
  }
}

TEST_CASE("position-basis dynamics at resonant steps") {
  const Lattice lat = make_lattice(16);
  const OperatorMatrix h = build_hamiltonian(rotor(), lat, Ordering::Weyl);
  const int k = 3;
  const CMatrix u = evolution_operator(h, k * lat.spacing);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) {
      const double expected = (i == (j + k) % 16) ? 1.0 : 0.0;
      CHECK(std::abs(std::abs(u(i, j)) - expected) <= 1e-10);
    }
  }
}

TEST_CASE("heisenberg commutator: rotor") {
  const Lattice lat = make_lattice(64);
  const OperatorMatrix h = build_hamiltonian(rotor(), lat, Ordering::Weyl);
  CVector sinq(64);
  for (std::size_t j = 0; j < 64; ++j) sinq[j] = std::sin(lat.points[j]);
  const OperatorMatrix q = make_operator(CMatrix(sinq.asDiagonal()), 64);

  CHECK(heisenberg_commutator_norm(h, q, 0.0) == 0.0);
  // Flow-resonant time: the propagator is an exact site permutation.
  CHECK(heisenberg_commutator_norm(h, q, 8.0 * lat.spacing) <= 1e-10);
}

TEST_CASE("heisenberg commutator: nonlinear field decays under refinement") {
  double values[2];
  int idx = 0;
  for (std::size_t n : {std::size_t(64), std::size_t(128)}) {
    const Lattice lat = make_lattice(n);
    const OperatorMatrix h =
        build_hamiltonian(sine_field(), lat, Ordering::Weyl);
    CVector sinq(n);
    for (std::size_t j = 0; j < n; ++j) sinq[j] = std::sin(lat.points[j]);
    const OperatorMatrix q = make_operator(CMatrix(sinq.asDiagonal()), n);
    values[idx++] = heisenberg_commutator_norm(h, q, 0.5, 0.25);
  }
  CHECK(values[0] <= 1e-2);
  CHECK(values[1] <= values[0] / 4.0);
  // Scale frozen from the pilot study: ~1.7e-5 at N=64, ~2.1e-8 at N=128.
  CHECK(values[0] <= 1e-4);
  CHECK(values[1] <= 1e-6);
}

TEST_CASE("heisenberg commutator preconditions") {
  const Lattice lat = make_lattice(16);
  const OperatorMatrix h = build_hamiltonian(sine_field(), lat, Ordering::Weyl);
  const OperatorMatrix pleft =
      build_hamiltonian(sine_field(), lat, Ordering::PLeft);
  CVector sinq(16);
  for (std::size_t j = 0; j < 16; ++j) sinq[j] = std::sin(lat.points[j]);
  const OperatorMatrix q = make_operator(CMatrix(sinq.asDiagonal()), 16);
  CHECK_THROWS_AS(heisenberg_commutator_norm(pleft, q, 1.0), Error);
  CHECK_THROWS_AS(heisenberg_commutator_norm(h, h, 1.0), Error);
}

TEST_CASE("blab matrix container round-trips") {
  const Lattice lat = make_lattice(8);
  const OperatorMatrix h = build_hamiltonian(sine_field(), lat, Ordering::Weyl);
  const auto dir = std::filesystem::temp_directory_path() / "blab_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "h.blab";
  save_matrix_blab(path, h.m);
  const CMatrix back = load_matrix_blab(path);
  CHECK(max_abs(CMatrix(back - h.m)) == 0.0);

  RMatrix r(2, 3);
  r << 1, 2, 3, 4, 5, 6;
  const auto rpath = dir / "r.blab";
  save_matrix_blab(rpath, r);
  const CMatrix rback = load_matrix_blab(rpath);
  CHECK(rback.rows() == 2);
  CHECK(rback.cols() == 3);
  CHECK(std::abs(rback(1, 2).real() - 6.0) == 0.0);
  CHECK(std::abs(rback(1, 2).imag()) == 0.0);

  save_matrix_csv(dir / "h.csv", h.m);
  CHECK(std::filesystem::file_size(dir / "h.csv") > 0);
  std::filesystem::remove_all(dir);
}
