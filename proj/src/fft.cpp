#include "blab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace blab::fft {
namespace {

// One cached plan per (n, sign). Plans use FFTW_ESTIMATE so planning is
// deterministic run to run; execution goes through the new-array interface
// on caller buffers (alignment-agnostic since plans are built unaligned).
struct Plan1d {
  fftw_plan plan = nullptr;
  std::vector<Complex> in, out;
};

std::mutex g_mutex;

fftw_complex* fc(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
[[maybe_unused]] const fftw_complex* fc(const Complex* p) {
  return reinterpret_cast<const fftw_complex*>(p);
}

void run_1d(const Complex* in, Complex* out, std::size_t n, int sign) {
  std::lock_guard<std::mutex> lock(g_mutex);
  static std::map<std::pair<std::size_t, int>, Plan1d> cache;
  auto& entry = cache[{n, sign}];
  if (!entry.plan) {
    entry.in.resize(n);
    entry.out.resize(n);
    entry.plan = fftw_plan_dft_1d(static_cast<int>(n), fc(entry.in.data()),
                                  fc(entry.out.data()), sign, FFTW_ESTIMATE);
    if (!entry.plan) throw Error("fftw: failed to create plan");
  }
  std::copy(in, in + n, entry.in.begin());
  fftw_execute(entry.plan);
  std::copy(entry.out.begin(), entry.out.end(), out);
}

}  // namespace

void forward(const Complex* in, Complex* out, std::size_t n) {
  run_1d(in, out, n, FFTW_FORWARD);
}

void inverse(const Complex* in, Complex* out, std::size_t n) {
  run_1d(in, out, n, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
}

void forward(const CVector& in, CVector& out) {
  out.resize(in.size());
  forward(in.data(), out.data(), static_cast<std::size_t>(in.size()));
}

void inverse(const CVector& in, CVector& out) {
  out.resize(in.size());
  inverse(in.data(), out.data(), static_cast<std::size_t>(in.size()));
}

struct ManyPlan::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<Complex> buf;  // planning buffer, kept alive for new-array exec
  std::size_t n = 0, howmany = 0, stride = 0, dist = 0;
};

ManyPlan::ManyPlan(std::size_t n, std::size_t howmany, std::size_t stride,
                   std::size_t dist)
    : impl_(std::make_unique<Impl>()) {
  impl_->n = n;
  impl_->howmany = howmany;
  impl_->stride = stride;
  impl_->dist = dist;
  const std::size_t total = (howmany - 1) * dist + (n - 1) * stride + 1;
  impl_->buf.resize(total);
  const int ni = static_cast<int>(n);
  const int rank_n[1] = {ni};
  std::lock_guard<std::mutex> lock(g_mutex);
  impl_->fwd = fftw_plan_many_dft(
      1, rank_n, static_cast<int>(howmany), fc(impl_->buf.data()), nullptr,
      static_cast<int>(stride), static_cast<int>(dist), fc(impl_->buf.data()),
      nullptr, static_cast<int>(stride), static_cast<int>(dist), FFTW_FORWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl_->bwd = fftw_plan_many_dft(
      1, rank_n, static_cast<int>(howmany), fc(impl_->buf.data()), nullptr,
      static_cast<int>(stride), static_cast<int>(dist), fc(impl_->buf.data()),
      nullptr, static_cast<int>(stride), static_cast<int>(dist), FFTW_BACKWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!impl_->fwd || !impl_->bwd) throw Error("fftw: failed to create batched plan");
}

ManyPlan::~ManyPlan() {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
}

void ManyPlan::forward(Complex* data) const {
  fftw_execute_dft(impl_->fwd, fc(data), fc(data));
}

void ManyPlan::inverse(Complex* data) const {
  fftw_execute_dft(impl_->bwd, fc(data), fc(data));
  const double scale = 1.0 / static_cast<double>(impl_->n);
  const std::size_t total =
      (impl_->howmany - 1) * impl_->dist + (impl_->n - 1) * impl_->stride + 1;
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

}  // namespace blab::fft
