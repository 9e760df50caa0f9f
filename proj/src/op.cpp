#include "blab/op.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include "blab/fft.hpp"

namespace blab {

OperatorMatrix make_operator(CMatrix m, std::size_t lattice_n) {
  if (m.rows() != m.cols()) throw Error("make_operator: matrix must be square");
  OperatorMatrix op;
  const double scale = std::max(max_abs(m), 1e-300);
  op.hermitian = max_abs(CMatrix(m - m.adjoint())) <= 1e-10 * scale;
  op.m = std::move(m);
  op.lattice_n = lattice_n;
  return op;
}

OperatorMatrix momentum_operator(const Lattice& lat) {
  return make_operator(CMatrix(-kI * derivative_matrix(lat)), lat.n_points);
}

OperatorMatrix build_hamiltonian(const FlowField& field, const Lattice& lat,
                                 Ordering ordering) {
  const CMatrix p = -kI * derivative_matrix(lat);
  const RVector f = field.sample_f(lat);
  const CMatrix fd = f.cast<Complex>().asDiagonal();
  CMatrix h;
  if (ordering == Ordering::Weyl) {
    h = 0.5 * (p * fd + fd * p);
  } else {
    h = p * fd;
    if (field.has_g()) h += CMatrix(field.sample_g(lat).asDiagonal());
  }
  return make_operator(std::move(h), lat.n_points);
}

CVector hermitize_g(const FlowField& field, const Lattice& lat) {
  const CVector fs = field.sample_f(lat).cast<Complex>();
  return 0.5 * kI * spectral_derivative(lat, fs);
}

OperatorMatrix build_hamiltonian_pleft_with_g(const FlowField& field,
                                              const Lattice& lat,
                                              const CVector& g_samples) {
  if (static_cast<std::size_t>(g_samples.size()) != lat.n_points)
    throw Error("build_hamiltonian_pleft_with_g: g length mismatch");
  const CMatrix p = -kI * derivative_matrix(lat);
  const CMatrix fd = field.sample_f(lat).cast<Complex>().asDiagonal();
  CMatrix h = p * fd;
  h += CMatrix(g_samples.asDiagonal());
  return make_operator(std::move(h), lat.n_points);
}

Spectrum spectrum(const OperatorMatrix& op) {
  if (!op.hermitian)
    throw Error("spectrum: operator is not hermitian (only normal operators "
                "admit the V Lambda V^dagger reconstruction)");
  Eigensystem es = hermitian_eigensystem(op.m);
  // SelfAdjointEigenSolver returns ascending eigenvalues already; keep a
  // stable (Re, Im, index) sort for the documented contract.
  const auto n = es.values.size();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.values[a] < es.values[b];
  });
  Spectrum s;
  s.values.resize(n);
  s.vectors.resize(es.vectors.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.values[i] = es.values[idx[i]];
    s.vectors.col(i) = es.vectors.col(idx[i]);
  }
  return s;
}

CMatrix evolution_operator(const OperatorMatrix& op, double t) {
  if (op.hermitian) {
    Eigensystem es = hermitian_eigensystem(op.m);
    return evolution_from_eigensystem(es, t);
  }
  return expm(CMatrix(-kI * t * op.m));
}

double heisenberg_commutator_norm(const OperatorMatrix& op,
                                  const OperatorMatrix& observable, double t,
                                  double band_fraction) {
  if (!op.hermitian)
    throw Error("heisenberg_commutator_norm: evolution requires hermitian op");
  const auto n = op.m.rows();
  if (observable.m.rows() != n)
    throw Error("heisenberg_commutator_norm: dimension mismatch");
  CMatrix offdiag = observable.m;
  offdiag.diagonal().setZero();
  if (max_abs(offdiag) > 1e-12 * std::max(max_abs(observable.m), 1e-300))
    throw Error("heisenberg_commutator_norm: observable must be diagonal");
  const double qscale = max_abs(observable.m);
  if (qscale == 0.0 || t == 0.0) return 0.0;

  const CMatrix u = evolution_operator(op, t);
  const CMatrix qt = u.adjoint() * observable.m * u;
  const CMatrix comm = qt * observable.m - observable.m * qt;

  // Restrict to the resolved Fourier band.
  const std::size_t nn = static_cast<std::size_t>(n);
  const long kmax = static_cast<long>(band_fraction * static_cast<double>(nn));
  std::vector<std::size_t> keep;
  for (std::size_t m = 0; m < nn; ++m)
    if (std::labs(wavenumber_index(m, nn)) <= kmax) keep.push_back(m);

  // Unitary DFT columns: F[m, j] = e^{-2pi i m j / n} / sqrt(n).
  CMatrix basis(n, static_cast<Eigen::Index>(keep.size()));
  CVector e(n);
  for (std::size_t c = 0; c < keep.size(); ++c) {
    for (std::size_t j = 0; j < nn; ++j)
      e[static_cast<Eigen::Index>(j)] =
          std::exp(kI * (kTwoPi * static_cast<double>(keep[c]) *
                         static_cast<double>(j) / static_cast<double>(nn))) /
          std::sqrt(static_cast<double>(nn));
    basis.col(static_cast<Eigen::Index>(c)) = e;
  }
  const CMatrix restricted = basis.adjoint() * comm * basis;
  return induced_2_norm(restricted) / (qscale * qscale);
}

double resolved_band_apply_norm(const CMatrix& m, double band_fraction) {
  const std::size_t n = static_cast<std::size_t>(m.rows());
  const long kmax = static_cast<long>(band_fraction * static_cast<double>(n));
  double worst = 0.0;
  CVector probe(m.rows());
  for (long k = -kmax; k <= kmax; ++k) {
    for (std::size_t j = 0; j < n; ++j)
      probe[static_cast<Eigen::Index>(j)] =
          std::exp(kI * (kTwoPi * static_cast<double>(k) *
                         static_cast<double>(j) / static_cast<double>(n)));
    probe /= probe.norm();
    worst = std::max(worst, (m * probe).norm());
  }
  return worst;
}

namespace {

constexpr char kMagic[4] = {'B', 'L', 'A', 'B'};

void write_header(std::ofstream& out, std::uint32_t rows, std::uint32_t cols,
                  std::uint32_t flags) {
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(&flags), 4);
}

}  // namespace

void save_matrix_blab(const std::filesystem::path& path, const CMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_matrix_blab: cannot open " + path.string());
  write_header(out, static_cast<std::uint32_t>(m.rows()),
               static_cast<std::uint32_t>(m.cols()), 0);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double re = m(r, c).real(), im = m(r, c).imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
  if (!out) throw Error("save_matrix_blab: write failed for " + path.string());
}

void save_matrix_blab(const std::filesystem::path& path, const RMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_matrix_blab: cannot open " + path.string());
  write_header(out, static_cast<std::uint32_t>(m.rows()),
               static_cast<std::uint32_t>(m.cols()), 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  if (!out) throw Error("save_matrix_blab: write failed for " + path.string());
}

CMatrix load_matrix_blab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_matrix_blab: cannot open " + path.string());
  char magic[4];
  std::uint32_t rows = 0, cols = 0, flags = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  in.read(reinterpret_cast<char*>(&flags), 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("load_matrix_blab: bad header in " + path.string());
  CMatrix m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), 8);
      if (flags == 0) in.read(reinterpret_cast<char*>(&im), 8);
      m(r, c) = Complex(re, im);
    }
  if (!in) throw Error("load_matrix_blab: truncated file " + path.string());
  return m;
}

void save_matrix_csv(const std::filesystem::path& path, const CMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("save_matrix_csv: cannot open " + path.string());
  out.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c).real() << ',' << m(r, c).imag();
    }
    out << '\n';
  }
}

}  // namespace blab
