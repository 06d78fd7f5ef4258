// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/ingest.hpp"

namespace aet {

/// One vibration cycle of AE samples.
struct CycleSegment {
  std::vector<double> samples;
  int class_index = 0;
  std::string campaign_id;
  std::string sensor_id;
  /// Index j of the crossing pair [c_j, c_{j+1}) within the stream.
  std::int64_t cycle_index = 0;
  std::int64_t start_sample = 0;
};

/// Indices i with signal[i-1] > 0 and signal[i] <= 0, ascending.
std::vector<std::int64_t> zero_crossings(std::span<const float> signal);
std::vector<std::int64_t> zero_crossings(std::span<const double> signal);

/// Cuts `ae` at the positive-to-negative crossings of `vibro`. Partial head
/// and tail cycles, unlabeled cycles and cycles straddling two torque
/// intervals are dropped. Output is ordered by start_sample.
std::vector<CycleSegment> segment_cycles(const AEStream& ae, const AEStream& vibro);

/// w[n] = 0.5 (1 - cos(2 pi n / (N-1))), N >= 2.
std::vector<double> hanning_window(std::size_t n);
void apply_hanning_inplace(std::span<double> samples);
CycleSegment apply_hanning(CycleSegment segment);

}  // namespace aet
