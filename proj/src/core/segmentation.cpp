// SPDX-License-Identifier: Apache-2.0
#include "core/segmentation.hpp"

#include <cmath>
#include <numbers>

namespace aet {

namespace {

template <class T>
std::vector<std::int64_t> crossings_impl(std::span<const T> signal) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 1; i < signal.size(); ++i) {
    if (signal[i - 1] > T(0) && signal[i] <= T(0)) out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> zero_crossings(std::span<const float> signal) { return crossings_impl(signal); }
std::vector<std::int64_t> zero_crossings(std::span<const double> signal) { return crossings_impl(signal); }

std::vector<CycleSegment> segment_cycles(const AEStream& ae, const AEStream& vibro) {
  if (ae.manifest.sample_rate_hz != vibro.manifest.sample_rate_hz) {
    fail(ErrorCode::invalid_argument, "AE and vibrometer sample rates differ");
  }
  if (ae.samples.size() != vibro.samples.size()) {
    fail(ErrorCode::invalid_argument, "AE and vibrometer lengths differ");
  }
  const auto crossings = zero_crossings(std::span<const float>(vibro.samples));
  std::vector<CycleSegment> segments;
  if (crossings.size() < 2) return segments;
  segments.reserve(crossings.size() - 1);
  const auto& schedule = ae.manifest.torque_schedule;
  for (std::size_t j = 0; j + 1 < crossings.size(); ++j) {
    const std::int64_t begin = crossings[j];
    const std::int64_t end = crossings[j + 1];
    const int interval = ae.manifest.interval_index_at(begin);
    if (interval < 0) continue;
    if (!schedule[static_cast<std::size_t>(interval)].contains(end - 1)) continue;
    CycleSegment seg;
    seg.samples.assign(ae.samples.begin() + begin, ae.samples.begin() + end);
    seg.class_index = schedule[static_cast<std::size_t>(interval)].class_index;
    seg.campaign_id = ae.manifest.campaign_id;
    seg.sensor_id = ae.manifest.sensor_id;
    seg.cycle_index = static_cast<std::int64_t>(j);
    seg.start_sample = begin;
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<double> hanning_window(std::size_t n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "Hanning window needs at least 2 samples");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom));
  }
  // Endpoints are zero by definition; cos(2 pi) is not exactly 1 in floating point.
  w.front() = 0.0;
  w.back() = 0.0;
  return w;
}

void apply_hanning_inplace(std::span<double> samples) {
  const auto w = hanning_window(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] *= w[i];
}

CycleSegment apply_hanning(CycleSegment segment) {
  apply_hanning_inplace(segment.samples);
  return segment;
}

}  // namespace aet
