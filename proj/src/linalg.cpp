#include "blab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace blab {

Eigensystem hermitian_eigensystem(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error("hermitian_eigensystem: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

// Pade order-13 coefficients (Higham 2005).
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

double one_norm(const CMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error("expm: matrix must be square");
  const auto n = a.rows();
  const double theta13 = 5.371920351148152;
  const double nrm = one_norm(a);
  int squarings = 0;
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    if (squarings < 0) squarings = 0;
  }
  const CMatrix as = a / std::pow(2.0, squarings);
  const CMatrix a2 = as * as;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a2 * a4;
  const auto& b = kPade13;
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                          b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const CMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                    b[4] * a4 + b[2] * a2 + b[0] * id;
  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

CMatrix evolution_from_eigensystem(const Eigensystem& es, double t) {
  CVector phases(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    phases[i] = std::exp(-kI * es.values[i] * t);
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

double induced_inf_norm(const CMatrix& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double induced_2_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace blab
