#pragma once

#include "blab/common.hpp"

namespace blab {

struct Eigensystem {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

/// Hermitian eigendecomposition (input is not symmetrized; callers verify
/// hermiticity through OperatorMatrix).
Eigensystem hermitian_eigensystem(const CMatrix& m);

/// exp(A) for a general complex square matrix, Pade 13 scaling-and-squaring.
CMatrix expm(const CMatrix& a);

/// exp(-i t H) for hermitian H via eigendecomposition.
CMatrix evolution_from_eigensystem(const Eigensystem& es, double t);

/// Induced infinity norm (max row sum of absolute values).
double induced_inf_norm(const CMatrix& m);

/// Largest singular value.
double induced_2_norm(const CMatrix& m);

}  // namespace blab
