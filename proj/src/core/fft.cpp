// SPDX-License-Identifier: Apache-2.0
#include "core/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "core/common.hpp"

namespace aet {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "FFT length must be >= 2");
  std::vector<double> real(n);
  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  std::vector<std::complex<double>> full(n);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_r2c_1d(len, real.data(), reinterpret_cast<fftw_complex*>(spectrum.data()), flags);
  backward_ = fftw_plan_dft_1d(len, reinterpret_cast<fftw_complex*>(full.data()),
                               reinterpret_cast<fftw_complex*>(full.data()), FFTW_BACKWARD, flags);
  if (!forward_ || !backward_) fail(ErrorCode::internal, "FFTW planning failed");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

std::shared_ptr<const FftPlan> FftPlan::get(std::size_t n) {
  std::lock_guard lock(planner_mutex());
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const FftPlan>(n);
  cache.emplace(n, plan);
  return plan;
}

void FftPlan::forward_real(std::span<double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != n_ / 2 + 1) fail(ErrorCode::internal, "FFT buffer size mismatch");
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) fail(ErrorCode::internal, "FFT buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

}  // namespace aet
