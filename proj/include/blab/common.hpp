#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace blab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// All recoverable failures throw this; the CLI turns it into failure JSON.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double max_abs(const CVector& v) { return v.cwiseAbs().maxCoeff(); }
inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Largest singular-value proxy used in tolerance denominators: entrywise
/// max scaled by dimension is avoided, matrices here are small enough to
/// take the true induced 2-norm when needed.
inline double fro_norm(const CMatrix& m) { return m.norm(); }

}  // namespace blab
