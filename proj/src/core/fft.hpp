// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace aet {

/// FFTW plans for one transform length. Plans are created under a global
/// lock and cached; executing them is safe from any number of threads.
class FftPlan {
 public:
  static std::shared_ptr<const FftPlan> get(std::size_t n);

  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }

  /// Real forward transform: `in` has n entries, `out` n/2+1.
  void forward_real(std::span<double> in, std::span<std::complex<double>> out) const;
  /// Unnormalized complex backward transform, in place, n entries.
  void backward(std::span<std::complex<double>> data) const;

  explicit FftPlan(std::size_t n);

 private:
  std::size_t n_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace aet
