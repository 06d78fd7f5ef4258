// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/ref_trainer.hpp"
#include "core/segmentation.hpp"

namespace aet {

// --- segment store: segments.jsonl + segments.f32le ------------------------

struct SegmentRecord {
  std::string campaign_id;
  std::string sensor_id;
  int class_index = 0;
  std::int64_t cycle_index = 0;
  std::int64_t start_sample = 0;
  std::int64_t length = 0;
  /// Offset of the first sample in segments.f32le, in samples.
  std::int64_t offset = 0;
  double sample_rate_hz = 0.0;
  bool windowed = true;
};

struct SegmentStore {
  std::vector<SegmentRecord> records;
  std::vector<float> samples;

  std::vector<double> segment_samples(std::size_t i) const;
};

/// Writes `<dir>/segments.jsonl` and `<dir>/segments.f32le`.
void write_segment_store(const std::string& dir, const std::vector<CycleSegment>& segments,
                         double sample_rate_hz, bool windowed);
SegmentStore read_segment_store(const std::string& dir);

// --- image dataset manifests (JSON lines) -----------------------------------

/// One image / feature row. `path` and `features_file` are stored relative
/// to the manifest's directory and resolved to full paths when read.
struct DatasetEntry {
  std::string path;
  int class_index = 0;
  std::string campaign_id;
  std::string sensor_id;
  std::int64_t cycle_index = 0;
  std::string features_file;
  std::int64_t feature_row = -1;
};

void write_dataset_manifest(const std::string& manifest_path, const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> read_dataset_manifest(const std::string& manifest_path);

/// Raw float32 LE rows of kFeatureDim values.
void write_feature_file(const std::string& path, const std::vector<double>& rows, std::size_t dim);
/// Loads the feature rows referenced by `entries` (cached per file).
LabeledFeatures load_features(const std::vector<DatasetEntry>& entries, std::size_t dim = kFeatureDim);

}  // namespace aet
