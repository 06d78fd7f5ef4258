// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/common.hpp"

namespace aet {

/// Generalized Morse wavelet in the frequency domain,
///   Psi(w) = 2 (e*gamma/beta)^(beta/gamma) w^beta exp(-w^gamma),  w > 0,
/// and 0 for w <= 0. Its maximum, 2, sits at w = (beta/gamma)^(1/gamma).
double morse_response(double omega, double gamma, double beta);
double morse_peak_frequency(double gamma, double beta);

struct FilterBankConfig {
  double sample_rate_hz = 0.0;
  std::size_t n_fft = 0;
  double voices_per_octave = 12.0;
  int octaves = 8;
  /// When > 0, exactly this many filters spread over `octaves` octaves
  /// (total_filters = 12 gives the literal twelve-filter bank).
  int total_filters = 0;
  double gamma = 3.0;
  double time_bandwidth = 60.0;
};

/// Analytic Morse filters sampled on the n_fft-point DFT grid. Row j peaks
/// at centre frequency f_max * 2^(-j / voices), f_max = Nyquist.
class MorseFilterBank {
 public:
  static MorseFilterBank build(const FilterBankConfig& cfg);

  double gamma() const { return gamma_; }
  double beta() const { return beta_; }
  double time_bandwidth() const { return time_bandwidth_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  double voices_per_octave() const { return voices_per_octave_; }
  double f_max_hz() const { return f_max_hz_; }
  double f_min_hz() const { return f_min_hz_; }
  std::size_t n_fft() const { return n_fft_; }
  std::size_t n_scales() const { return center_freqs_hz_.size(); }
  const std::vector<double>& center_freqs_hz() const { return center_freqs_hz_; }

  /// Row j, n_fft samples; bin k holds frequency k/n_fft * fs for
  /// k <= n_fft/2 and negative frequencies above.
  std::span<const double> filter(std::size_t j) const;
  /// Continuous response of filter j at a (signed) frequency in Hz.
  double response(std::size_t j, double freq_hz) const;

 private:
  double gamma_ = 3.0;
  double beta_ = 20.0;
  double time_bandwidth_ = 60.0;
  double sample_rate_hz_ = 0.0;
  double voices_per_octave_ = 12.0;
  double f_max_hz_ = 0.0;
  double f_min_hz_ = 0.0;
  std::size_t n_fft_ = 0;
  std::vector<double> center_freqs_hz_;
  std::vector<double> scales_;
  std::vector<double> filters_;
};

/// CWT magnitudes, rows ordered from high to low frequency.
struct Scalogram {
  std::size_t n_scales = 0;
  std::size_t n_time = 0;
  std::vector<double> magnitudes;  // row-major n_scales x n_time
  std::vector<double> center_freqs_hz;

  double at(std::size_t row, std::size_t col) const { return magnitudes[row * n_time + col]; }
};

/// Zero-pads `samples` to n_fft; row j = |IFFT(FFT(x) * filter_j)| cut back
/// to the input length.
Scalogram cwt(std::span<const double> samples, const MorseFilterBank& bank);

// --- imaging -------------------------------------------------------------

inline constexpr std::size_t kImageSide = 224;

struct Colormap {
  std::array<std::array<std::uint8_t, 3>, 256> entries{};

  /// Parses "index,r,g,b" lines ('#' comments allowed); needs all 256 rows.
  static Colormap parse(std::string_view text);
};

/// The shipped dark-blue -> green -> yellow map (data/colormap_bgy256.csv).
const Colormap& default_colormap();

struct ImageProvenance {
  std::string campaign_id;
  std::string sensor_id;
  std::int64_t cycle_index = 0;
};

struct ScalogramImage {
  std::size_t width = kImageSide;
  std::size_t height = kImageSide;
  std::vector<std::uint8_t> pixels;  // height x width x 3, row-major
  int label = 0;
  ImageProvenance provenance;
};

enum class ImageScaling { per_image, fixed_range };

struct ImageOptions {
  ImageScaling scaling = ImageScaling::per_image;
  /// Used with ImageScaling::fixed_range.
  double range_min = 0.0;
  double range_max = 1.0;
  std::size_t side = kImageSide;
};

/// Bilinear (half-pixel-centre) resize of the magnitude matrix.
std::vector<double> resize_bilinear(const Scalogram& s, std::size_t out_rows, std::size_t out_cols);

/// Maps values to LUT indices round(255 * (v - lo) / (hi - lo)), clamped.
/// A degenerate range (hi <= lo) maps everything to index 0.
std::vector<std::uint8_t> lut_indices(std::span<const double> values, double lo, double hi);

ScalogramImage to_image(const Scalogram& s, const ImageOptions& options = {},
                        const Colormap& cmap = default_colormap());

}  // namespace aet
