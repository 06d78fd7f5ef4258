// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/ingest.hpp"

namespace aet {

/// Orthogonal quadrature-mirror filter pair. The highpass is derived as
/// g[n] = (-1)^n h[L-1-n].
struct WaveletFilterPair {
  std::string name;
  std::vector<double> lowpass;
  std::vector<double> highpass;

  /// Validates sum(h) = sqrt(2), sum(h^2) = 1 and double-shift
  /// orthogonality, each within 1e-8.
  static WaveletFilterPair from_lowpass(std::string name, std::vector<double> lowpass);
  /// Parses one coefficient per line, '#' comments allowed.
  static WaveletFilterPair parse(std::string name, std::string_view text);
  /// The shipped Daubechies-45 pair (data/db45.txt).
  static const WaveletFilterPair& db45();

  std::size_t length() const { return lowpass.size(); }
};

/// details[0] is the finest level. input_lengths[l] is the signal length
/// entering level l+1 before any odd-length padding.
struct CoefficientPyramid {
  std::vector<std::vector<double>> details;
  std::vector<double> approximation;
  std::vector<std::size_t> input_lengths;

  int levels() const { return static_cast<int>(details.size()); }
};

/// Periodic-extension DWT. Odd-length inputs at any level are padded by
/// repeating their last sample. Every level's input must be at least as long
/// as the filter.
CoefficientPyramid dwt(std::span<const double> signal, const WaveletFilterPair& filters, int level);
std::vector<double> idwt(const CoefficientPyramid& pyramid, const WaveletFilterPair& filters);

/// Largest depth for which dwt accepts a signal of this length.
int max_dwt_level(std::size_t length, std::size_t filter_length);

enum class ThresholdRule { universal_level_dependent };
enum class Shrinkage { soft, hard };

struct DenoiseConfig {
  int level = 0;
  ThresholdRule threshold_rule = ThresholdRule::universal_level_dependent;
  Shrinkage shrinkage = Shrinkage::soft;
  double block_seconds = 1.0;
};

nlohmann::json denoise_config_to_json(const DenoiseConfig& cfg);

/// sigma_j = median(|d_j|) / 0.6745, lambda_j = sigma_j * sqrt(2 ln N_j).
double universal_threshold(std::span<const double> detail);
double soft_threshold(double x, double lambda);

/// Thresholds the detail levels of one block and reconstructs it.
std::vector<double> denoise_block(std::span<const double> block, const DenoiseConfig& cfg,
                                  const WaveletFilterPair& filters = WaveletFilterPair::db45());

/// Splits the stream into blocks of block_seconds (a shorter remainder is
/// merged into the last block), denoises each block independently and
/// reassembles them in order. Level 0 returns the stream unchanged.
AEStream denoise_stream(const AEStream& stream, const DenoiseConfig& cfg, std::size_t jobs = 1,
                        const WaveletFilterPair& filters = WaveletFilterPair::db45());

}  // namespace aet
