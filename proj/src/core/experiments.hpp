// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/denoise.hpp"
#include "core/ingest.hpp"
#include "core/metrics.hpp"
#include "core/ref_trainer.hpp"

namespace aet {

// --- splits -------------------------------------------------------------------

struct SampleKey {
  int class_index = 0;
  std::string campaign_id;
  std::string sensor_id;
};

enum class SplitMode { noshm, shm_loco, gradual_prior };
std::string_view to_string(SplitMode mode);
/// Accepts noshm | loco | shm_loco | gradual | gradual_prior.
SplitMode parse_split_mode(std::string_view name);

struct SplitSpec {
  SplitMode mode = SplitMode::shm_loco;
  std::string test_campaign;
  /// Gradual prior: classes 1..prior_levels of the test campaign join training.
  int prior_levels = 0;
  /// train / val / test fractions for noshm.
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
  /// train share of the non-test campaigns for loco and gradual.
  double loco_train_fraction = 0.8;
  /// Sensors to keep; empty keeps all (sensor fusion pools them).
  std::vector<std::string> sensors;
  std::uint64_t seed = 0;
  int num_classes = kDefaultNumClasses;
};

nlohmann::json split_spec_to_json(const SplitSpec& s);
SplitSpec split_spec_from_json(const nlohmann::json& j);

/// Indices into the key list, each sorted ascending.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Stratified-by-class 80/10/10. Split totals are round(f * N), allotted to
/// classes by largest remainder. Needs >= 3 items in every present class.
SplitIndices split_noshm(std::span<const SampleKey> keys, const SplitSpec& spec);
/// Test = the whole test campaign; the rest is split train/val 80/20 by class.
SplitIndices split_loco(std::span<const SampleKey> keys, const SplitSpec& spec);
/// split_loco, then classes 1..prior_levels of the test campaign move into
/// train/val with the same 80/20 ratio.
SplitIndices split_gradual_prior(std::span<const SampleKey> keys, const SplitSpec& spec);
SplitIndices make_split(std::span<const SampleKey> keys, const SplitSpec& spec);

// --- in-process pipeline -------------------------------------------------------

struct StreamPair {
  AEStream ae;
  AEStream vibrometer;
};

/// Generates one stream pair per (campaign, sensor). Each campaign gets its
/// own seed derived from base.seed and the campaign name; sensors of one
/// campaign share burst events and differ in noise.
std::vector<StreamPair> generate_campaigns(const SyntheticSpec& base, const std::vector<std::string>& campaigns,
                                           const std::vector<std::string>& sensors);

struct PipelineConfig {
  DenoiseConfig denoise;
  bool hanning = true;
  double voices_per_octave = 12.0;
  int octaves = 8;
  bool literal_12_filters = false;
  std::size_t jobs = 0;
};

nlohmann::json pipeline_config_to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

/// Smallest power of two >= n (and >= 2).
std::size_t fft_length_for(std::size_t n);
MorseFilterBank filter_bank_for(const PipelineConfig& cfg, double sample_rate_hz, std::size_t max_segment_length);

struct FeatureDataset {
  std::vector<SampleKey> keys;
  std::vector<std::int64_t> cycle_indices;
  LabeledFeatures features;

  std::size_t size() const { return keys.size(); }
  LabeledFeatures subset(std::span<const std::size_t> idx) const;
};

/// denoise -> segment -> window -> CWT -> pooled features, for every pair.
FeatureDataset build_feature_dataset(const std::vector<StreamPair>& pairs, const PipelineConfig& cfg);

// --- repeated experiments --------------------------------------------------------

struct ExperimentResult {
  std::string key;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  MetricSummary metrics;
  double adjacent_error_fraction = 0.0;
  ConfusionMatrix confusion;
  std::string fingerprint;
  double wall_seconds = 0.0;
};

struct ExperimentSummary {
  std::string key;
  std::size_t repeats = 0;
  MetricSummary mean;
  MetricSummary stddev;
};

/// Trains and evaluates `repeats` times. Repeat r uses seed mix(base, r) for
/// both the train/val split and training; results are ordered by repeat.
std::vector<ExperimentResult> run_experiment(const FeatureDataset& data, const SplitSpec& split,
                                             const TrainConfig& train_cfg, int repeats, std::size_t jobs = 0,
                                             const std::string& key = "");

ExperimentSummary summarize_results(const std::vector<ExperimentResult>& results);

/// CSV with one row per repeat and one "summary" row (mean, *_std columns)
/// per key, in input order.
std::string results_to_csv(const std::vector<ExperimentResult>& results);
nlohmann::json results_to_json(const std::vector<ExperimentResult>& results);

/// Hex fingerprint of a JSON configuration.
std::string config_fingerprint(const nlohmann::json& config);

}  // namespace aet
