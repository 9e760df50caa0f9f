#pragma once

#include <cstddef>
#include <memory>

#include "blab/common.hpp"

namespace blab::fft {

/// Unnormalized forward DFT, X_k = sum_j x_j e^{-2pi i jk/n}.
void forward(const Complex* in, Complex* out, std::size_t n);

/// Inverse DFT with 1/n normalization.
void inverse(const Complex* in, Complex* out, std::size_t n);

void forward(const CVector& in, CVector& out);
void inverse(const CVector& in, CVector& out);

/// Batched strided 1-D transforms over a flattened 2-D array.
/// Layout is row-major with `howmany` lines of length `n`; `stride` is the
/// element step within a line, `dist` the step between line starts.
class ManyPlan {
 public:
  ManyPlan(std::size_t n, std::size_t howmany, std::size_t stride, std::size_t dist);
  ~ManyPlan();
  ManyPlan(const ManyPlan&) = delete;
  ManyPlan& operator=(const ManyPlan&) = delete;

  void forward(Complex* data) const;   // in place, unnormalized
  void inverse(Complex* data) const;   // in place, 1/n per line

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace blab::fft
