// SPDX-License-Identifier: Apache-2.0
#include "core/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/embedded_data.hpp"

namespace aet {

WaveletFilterPair WaveletFilterPair::from_lowpass(std::string name, std::vector<double> lowpass) {
  constexpr double tol = 1e-8;
  const std::size_t n = lowpass.size();
  if (n < 2 || n % 2 != 0) fail(ErrorCode::validation, name + ": filter length must be even and >= 2");
  double sum = 0.0, energy = 0.0;
  for (double h : lowpass) {
    sum += h;
    energy += h * h;
  }
  if (std::abs(sum - std::sqrt(2.0)) > tol) fail(ErrorCode::validation, name + ": sum of taps is not sqrt(2)");
  if (std::abs(energy - 1.0) > tol) fail(ErrorCode::validation, name + ": taps do not have unit energy");
  for (std::size_t k = 2; k < n; k += 2) {
    double dot = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) dot += lowpass[i] * lowpass[i + k];
    if (std::abs(dot) > tol) fail(ErrorCode::validation, name + ": taps are not orthogonal to even shifts");
  }
  WaveletFilterPair pair;
  pair.name = std::move(name);
  pair.highpass.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pair.highpass[i] = ((i % 2 == 0) ? 1.0 : -1.0) * lowpass[n - 1 - i];
  }
  pair.lowpass = std::move(lowpass);
  return pair;
}

WaveletFilterPair WaveletFilterPair::parse(std::string name, std::string_view text) {
  std::vector<double> taps;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      taps.push_back(std::stod(line));
    } catch (const std::exception&) {
      fail(ErrorCode::format, name + ": bad coefficient '" + line + "'");
    }
  }
  return from_lowpass(std::move(name), std::move(taps));
}

const WaveletFilterPair& WaveletFilterPair::db45() {
  static const WaveletFilterPair pair = [] {
    auto p = parse("db45", embedded::db45_text());
    if (p.length() != 90) fail(ErrorCode::validation, "db45 must have 90 taps");
    return p;
  }();
  return pair;
}

int max_dwt_level(std::size_t length, std::size_t filter_length) {
  int level = 0;
  while (length >= filter_length && length >= 2) {
    ++level;
    length = (length + 1) / 2;
  }
  return level;
}

namespace {

// One analysis step on an even-length signal with periodic wrap.
void analyze(std::span<const double> x, const WaveletFilterPair& f, std::vector<double>& approx,
             std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  const std::size_t taps = f.length();
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    std::size_t idx = (2 * k) % n;
    for (std::size_t t = 0; t < taps; ++t) {
      a += f.lowpass[t] * x[idx];
      d += f.highpass[t] * x[idx];
      if (++idx == n) idx = 0;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Adjoint of analyze(): reconstructs the even-length signal.
std::vector<double> synthesize(std::span<const double> approx, std::span<const double> detail,
                               const WaveletFilterPair& f) {
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  const std::size_t taps = f.length();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    std::size_t idx = (2 * k) % n;
    for (std::size_t t = 0; t < taps; ++t) {
      x[idx] += f.lowpass[t] * approx[k] + f.highpass[t] * detail[k];
      if (++idx == n) idx = 0;
    }
  }
  return x;
}

}  // namespace

CoefficientPyramid dwt(std::span<const double> signal, const WaveletFilterPair& filters, int level) {
  if (level < 1) fail(ErrorCode::invalid_argument, "dwt level must be >= 1");
  CoefficientPyramid pyr;
  std::vector<double> current(signal.begin(), signal.end());
  for (int l = 0; l < level; ++l) {
    if (current.size() < filters.length()) {
      fail(ErrorCode::invalid_argument, "signal of " + std::to_string(signal.size()) +
                                            " samples is too short for a level-" + std::to_string(level) +
                                            " " + filters.name + " decomposition");
    }
    pyr.input_lengths.push_back(current.size());
    if (current.size() % 2 != 0) current.push_back(current.back());
    std::vector<double> approx, detail;
    analyze(current, filters, approx, detail);
    pyr.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  pyr.approximation = std::move(current);
  return pyr;
}

std::vector<double> idwt(const CoefficientPyramid& pyr, const WaveletFilterPair& filters) {
  if (pyr.details.size() != pyr.input_lengths.size()) fail(ErrorCode::invalid_argument, "inconsistent pyramid");
  std::vector<double> current = pyr.approximation;
  for (int l = pyr.levels() - 1; l >= 0; --l) {
    const auto& detail = pyr.details[static_cast<std::size_t>(l)];
    if (detail.size() != current.size()) fail(ErrorCode::invalid_argument, "pyramid level size mismatch");
    current = synthesize(current, detail, filters);
    current.resize(pyr.input_lengths[static_cast<std::size_t>(l)]);
  }
  return current;
}

nlohmann::json denoise_config_to_json(const DenoiseConfig& cfg) {
  return {{"op", "denoise"},
          {"wavelet", "db45"},
          {"level", cfg.level},
          {"threshold", "universal_level_dependent"},
          {"shrinkage", cfg.shrinkage == Shrinkage::soft ? "soft" : "hard"},
          {"block_seconds", cfg.block_seconds}};
}

double universal_threshold(std::span<const double> detail) {
  if (detail.empty()) return 0.0;
  std::vector<double> mag(detail.size());
  std::transform(detail.begin(), detail.end(), mag.begin(), [](double v) { return std::abs(v); });
  const std::size_t mid = mag.size() / 2;
  std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(mid), mag.end());
  double median = mag[mid];
  if (mag.size() % 2 == 0) {
    const double lower = *std::max_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  const double sigma = median / 0.6745;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(detail.size())));
}

double soft_threshold(double x, double lambda) {
  const double m = std::abs(x) - lambda;
  return m > 0.0 ? std::copysign(m, x) : 0.0;
}

std::vector<double> denoise_block(std::span<const double> block, const DenoiseConfig& cfg,
                                  const WaveletFilterPair& filters) {
  if (cfg.level < 0) fail(ErrorCode::invalid_argument, "denoise level must be >= 0");
  if (cfg.level == 0) return {block.begin(), block.end()};
  auto pyr = dwt(block, filters, cfg.level);
  for (auto& detail : pyr.details) {
    const double lambda = universal_threshold(detail);
    for (auto& d : detail) {
      d = cfg.shrinkage == Shrinkage::soft ? soft_threshold(d, lambda) : (std::abs(d) > lambda ? d : 0.0);
    }
  }
  return idwt(pyr, filters);
}

AEStream denoise_stream(const AEStream& stream, const DenoiseConfig& cfg, std::size_t jobs,
                        const WaveletFilterPair& filters) {
  if (cfg.level < 0) fail(ErrorCode::invalid_argument, "denoise level must be >= 0");
  if (!(cfg.block_seconds > 0.0)) fail(ErrorCode::invalid_argument, "block_seconds must be positive");
  AEStream out = stream;
  out.manifest.processing.push_back(denoise_config_to_json(cfg));
  if (cfg.level == 0 || stream.samples.empty()) return out;

  const std::size_t n = stream.samples.size();
  const auto block = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.block_seconds * stream.manifest.sample_rate_hz)));
  const std::size_t n_blocks = std::max<std::size_t>(1, n / block);
  parallel_for(n_blocks, jobs, [&](std::size_t b) {
    const std::size_t begin = b * block;
    const std::size_t end = (b + 1 == n_blocks) ? n : begin + block;
    std::vector<double> x(stream.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                          stream.samples.begin() + static_cast<std::ptrdiff_t>(end));
    const auto y = denoise_block(x, cfg, filters);
    for (std::size_t i = 0; i < y.size(); ++i) out.samples[begin + i] = static_cast<float>(y[i]);
  });
  return out;
}

}  // namespace aet
