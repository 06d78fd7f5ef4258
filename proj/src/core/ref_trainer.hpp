// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/cwt.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/optsched.hpp"

namespace aet {

inline constexpr std::size_t kPoolSide = 16;
inline constexpr std::size_t kFeatureDim = kPoolSide * kPoolSide;

/// Area-weighted average pooling of the magnitudes onto a 16 x 16 grid,
/// flattened row-major (frequency-major). Every output cell covers the same
/// fraction of the input, so the mean is preserved.
std::vector<double> featurize(const Scalogram& s);

/// Row-major feature matrix with one label per row.
struct LabeledFeatures {
  std::size_t dim = kFeatureDim;
  std::vector<double> values;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  void push_back(std::span<const double> features, int label);
};

/// Per-feature standardization, fitted on the training split only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const LabeledFeatures& data);
  void apply(std::span<double> x) const;
  bool empty() const { return mean.empty(); }
};

/// softmax(W x + b) over standardized features.
struct LinearSoftmaxModel {
  int num_classes = kDefaultNumClasses;
  std::size_t feature_dim = kFeatureDim;
  /// Class-major weights (K x D) followed by K biases.
  std::vector<double> parameters;
  Standardizer standardizer;
  LossKind loss = LossKind::pom1b;
  nlohmann::json fingerprint = nlohmann::json::object();

  static LinearSoftmaxModel zeros(int num_classes, std::size_t feature_dim);
  double weight(int class_index, std::size_t d) const {
    return parameters[static_cast<std::size_t>(class_index - 1) * feature_dim + d];
  }
  double bias(int class_index) const {
    return parameters[static_cast<std::size_t>(num_classes) * feature_dim + static_cast<std::size_t>(class_index - 1)];
  }
};

/// Logits of already-standardized features.
std::vector<double> logits_standardized(const LinearSoftmaxModel& model, std::span<const double> x);
/// Class probabilities of raw (unstandardized) features.
std::vector<double> predict(const LinearSoftmaxModel& model, std::span<const double> raw_features);
int predict_class(const LinearSoftmaxModel& model, std::span<const double> raw_features);
ConfusionMatrix evaluate(const LinearSoftmaxModel& model, const LabeledFeatures& data);

struct TrainConfig {
  int epochs = 3;
  int batch_size = 8;
  OptimizerKind optimizer = OptimizerKind::adamw;
  ScheduleKind schedule = ScheduleKind::onecycle;
  double lr_max = 0.01;
  LossKind loss = LossKind::pom1b;
  std::uint64_t seed = 0;
  OptimizerHyper hyper;
  double div_factor = 25.0;
  double warmup_fraction = 0.30;
  double final_div_factor = 1e4;
  double piecewise_drop = 0.1;
  int piecewise_period_epochs = 1;
  /// Validation metrics are logged every val_every iterations and at the end.
  int val_every = 10;
  double init_scale = 0.01;
  int num_classes = kDefaultNumClasses;
};

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Schedule used by train() for a run of `iterations` mini-batches.
LearningRateSchedule make_schedule(const TrainConfig& cfg, std::int64_t iterations_per_epoch, std::int64_t iterations);

struct TrainLogRow {
  std::int64_t iteration = 0;
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_acc;
  std::optional<double> val_acc_pm1;
};

struct TrainResult {
  LinearSoftmaxModel model;
  std::vector<TrainLogRow> log;
};

/// Mini-batch training, stepping the optimizer once per batch with the
/// scheduled learning rate. Deterministic for a given seed.
TrainResult train(const LabeledFeatures& train_set, const LabeledFeatures& val_set, const TrainConfig& cfg);

std::string train_log_to_csv(const std::vector<TrainLogRow>& log);

/// "AETMODEL" magic, u32 LE header length, JSON header, then float64 LE
/// parameters, standardizer means and scales.
void save_model(const LinearSoftmaxModel& model, const std::string& path);
LinearSoftmaxModel load_model(const std::string& path);

}  // namespace aet
