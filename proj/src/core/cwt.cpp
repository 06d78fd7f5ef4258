// SPDX-License-Identifier: Apache-2.0
#include "core/cwt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "core/embedded_data.hpp"
#include "core/fft.hpp"

namespace aet {

double morse_peak_frequency(double gamma, double beta) { return std::pow(beta / gamma, 1.0 / gamma); }

double morse_response(double omega, double gamma, double beta) {
  if (!(omega > 0.0)) return 0.0;
  const double log_amp = std::log(2.0) + (beta / gamma) * (1.0 + std::log(gamma) - std::log(beta));
  return std::exp(log_amp + beta * std::log(omega) - std::pow(omega, gamma));
}

MorseFilterBank MorseFilterBank::build(const FilterBankConfig& cfg) {
  if (cfg.n_fft < 2) fail(ErrorCode::invalid_argument, "n_fft must be >= 2");
  if (cfg.octaves < 1) fail(ErrorCode::invalid_argument, "octaves must be >= 1");
  if (!(cfg.sample_rate_hz > 0.0)) fail(ErrorCode::invalid_argument, "sample rate must be positive");
  if (!(cfg.gamma > 0.0) || !(cfg.time_bandwidth > 0.0)) {
    fail(ErrorCode::invalid_argument, "Morse gamma and time-bandwidth must be positive");
  }
  std::size_t count = 0;
  if (cfg.total_filters > 0) {
    count = static_cast<std::size_t>(cfg.total_filters);
  } else {
    if (!(cfg.voices_per_octave > 0.0)) fail(ErrorCode::invalid_argument, "voices_per_octave must be positive");
    count = static_cast<std::size_t>(std::llround(cfg.voices_per_octave * cfg.octaves));
  }
  if (count < 1) fail(ErrorCode::invalid_argument, "filter bank would be empty");

  MorseFilterBank bank;
  bank.gamma_ = cfg.gamma;
  bank.time_bandwidth_ = cfg.time_bandwidth;
  bank.beta_ = cfg.time_bandwidth / cfg.gamma;
  bank.sample_rate_hz_ = cfg.sample_rate_hz;
  bank.n_fft_ = cfg.n_fft;
  bank.voices_per_octave_ = static_cast<double>(count) / cfg.octaves;
  bank.f_max_hz_ = cfg.sample_rate_hz / 2.0;
  bank.f_min_hz_ = bank.f_max_hz_ / std::pow(2.0, cfg.octaves);

  const double peak = morse_peak_frequency(bank.gamma_, bank.beta_);
  bank.center_freqs_hz_.resize(count);
  bank.scales_.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double f = bank.f_max_hz_ * std::pow(2.0, -static_cast<double>(j) / bank.voices_per_octave_);
    bank.center_freqs_hz_[j] = f;
    // Digital radian frequency of the centre is 2 pi f / fs.
    bank.scales_[j] = peak / (2.0 * std::numbers::pi * f / cfg.sample_rate_hz);
  }

  const std::size_t n = cfg.n_fft;
  bank.filters_.assign(count * n, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    double* row = bank.filters_.data() + j * n;
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      row[k] = morse_response(bank.scales_[j] * omega, bank.gamma_, bank.beta_);
    }
  }
  return bank;
}

std::span<const double> MorseFilterBank::filter(std::size_t j) const {
  if (j >= n_scales()) fail(ErrorCode::invalid_argument, "filter index out of range");
  return {filters_.data() + j * n_fft_, n_fft_};
}

double MorseFilterBank::response(std::size_t j, double freq_hz) const {
  if (j >= n_scales()) fail(ErrorCode::invalid_argument, "filter index out of range");
  const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz_;
  return morse_response(scales_[j] * omega, gamma_, beta_);
}

Scalogram cwt(std::span<const double> samples, const MorseFilterBank& bank) {
  if (samples.empty()) fail(ErrorCode::invalid_argument, "cwt of an empty signal");
  const std::size_t n = bank.n_fft();
  if (samples.size() > n) {
    fail(ErrorCode::invalid_argument, "segment of " + std::to_string(samples.size()) +
                                          " samples exceeds n_fft " + std::to_string(n));
  }
  const auto plan = FftPlan::get(n);
  std::vector<double> padded(n, 0.0);
  std::copy(samples.begin(), samples.end(), padded.begin());
  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  plan->forward_real(padded, spectrum);

  Scalogram out;
  out.n_scales = bank.n_scales();
  out.n_time = samples.size();
  out.center_freqs_hz = bank.center_freqs_hz();
  out.magnitudes.resize(out.n_scales * out.n_time);
  std::vector<std::complex<double>> work(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < out.n_scales; ++j) {
    const auto filt = bank.filter(j);
    std::fill(work.begin(), work.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t k = 1; k <= n / 2; ++k) work[k] = spectrum[k] * filt[k];
    plan->backward(work);
    double* row = out.magnitudes.data() + j * out.n_time;
    for (std::size_t t = 0; t < out.n_time; ++t) row[t] = std::abs(work[t]) * inv_n;
  }
  return out;
}

// --- imaging -------------------------------------------------------------

Colormap Colormap::parse(std::string_view text) {
  Colormap cmap;
  std::array<bool, 256> seen{};
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    int values[4] = {};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 4; ++f) {
      auto [next, ec] = std::from_chars(p, end, values[f]);
      if (ec != std::errc()) fail(ErrorCode::format, "colormap line " + std::to_string(line_no) + ": bad number");
      p = next;
      if (f < 3) {
        if (p == end || *p != ',') fail(ErrorCode::format, "colormap line " + std::to_string(line_no) + ": expected ','");
        ++p;
      }
    }
    const int idx = values[0];
    if (idx < 0 || idx > 255) fail(ErrorCode::format, "colormap index out of range");
    for (int c = 0; c < 3; ++c) {
      if (values[c + 1] < 0 || values[c + 1] > 255) fail(ErrorCode::format, "colormap channel out of range");
      cmap.entries[static_cast<std::size_t>(idx)][static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(values[c + 1]);
    }
    seen[static_cast<std::size_t>(idx)] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    fail(ErrorCode::format, "colormap must define all 256 entries");
  }
  return cmap;
}

const Colormap& default_colormap() {
  static const Colormap cmap = Colormap::parse(embedded::colormap_text());
  return cmap;
}

std::vector<double> resize_bilinear(const Scalogram& s, std::size_t out_rows, std::size_t out_cols) {
  if (s.n_scales == 0 || s.n_time == 0) fail(ErrorCode::invalid_argument, "empty scalogram");
  std::vector<double> out(out_rows * out_cols);
  auto source_coord = [](std::size_t dst, std::size_t src_size, std::size_t dst_size, std::size_t& i0,
                         std::size_t& i1, double& frac) {
    double x = (static_cast<double>(dst) + 0.5) * static_cast<double>(src_size) / static_cast<double>(dst_size) - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(src_size - 1));
    i0 = static_cast<std::size_t>(std::floor(x));
    i1 = std::min(i0 + 1, src_size - 1);
    frac = x - static_cast<double>(i0);
  };
  std::vector<std::size_t> c0(out_cols), c1(out_cols);
  std::vector<double> cf(out_cols);
  for (std::size_t c = 0; c < out_cols; ++c) source_coord(c, s.n_time, out_cols, c0[c], c1[c], cf[c]);
  for (std::size_t r = 0; r < out_rows; ++r) {
    std::size_t r0, r1;
    double rf;
    source_coord(r, s.n_scales, out_rows, r0, r1, rf);
    for (std::size_t c = 0; c < out_cols; ++c) {
      const double top = s.at(r0, c0[c]) * (1.0 - cf[c]) + s.at(r0, c1[c]) * cf[c];
      const double bottom = s.at(r1, c0[c]) * (1.0 - cf[c]) + s.at(r1, c1[c]) * cf[c];
      out[r * out_cols + c] = top * (1.0 - rf) + bottom * rf;
    }
  }
  return out;
}

std::vector<std::uint8_t> lut_indices(std::span<const double> values, double lo, double hi) {
  std::vector<std::uint8_t> idx(values.size(), 0);
  if (!(hi > lo)) return idx;
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp((values[i] - lo) * scale, 0.0, 255.0);
    idx[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return idx;
}

ScalogramImage to_image(const Scalogram& s, const ImageOptions& options, const Colormap& cmap) {
  const auto resized = resize_bilinear(s, options.side, options.side);
  double lo = options.range_min, hi = options.range_max;
  if (options.scaling == ImageScaling::per_image) {
    const auto [mn, mx] = std::minmax_element(resized.begin(), resized.end());
    lo = *mn;
    hi = *mx;
  }
  const auto idx = lut_indices(resized, lo, hi);
  ScalogramImage img;
  img.width = options.side;
  img.height = options.side;
  img.pixels.resize(idx.size() * 3);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& rgb = cmap.entries[idx[i]];
    img.pixels[3 * i + 0] = rgb[0];
    img.pixels[3 * i + 1] = rgb[1];
    img.pixels[3 * i + 2] = rgb[2];
  }
  return img;
}

}  // namespace aet
