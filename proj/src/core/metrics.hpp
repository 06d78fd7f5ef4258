// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace aet {

/// K x K tally, rows = true class, columns = predicted class, 1-based API.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 7);

  int num_classes() const { return k_; }
  void accumulate(int true_class, int predicted_class);
  /// Adds another matrix of the same size (partial tallies from workers).
  void merge(const ConfusionMatrix& other);

  std::int64_t count(int true_class, int predicted_class) const;
  void set(int true_class, int predicted_class, std::int64_t value);
  /// N_k: number of samples whose true class is k.
  std::int64_t row_total(int true_class) const;
  std::int64_t total() const { return total_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int true_class, int predicted_class) const;

  int k_;
  std::vector<std::int64_t> m_;
  std::int64_t total_ = 0;
};

/// sum_i m(i,i) / N.
double accuracy(const ConfusionMatrix& cm);
/// sum_i sum_{|j-i|<=1} m(i,j) / N.
double accuracy_pm1(const ConfusionMatrix& cm);

/// Plus-or-minus-one recall/precision per class:
///   correct_k   = sum_{|j-k|<=1} m(k, j)
///   R(k)        = correct_k / N_k
///   predicted_k = sum_i sum_{|l|<=1} m(i, k-l)
///   P(k)        = correct_k / predicted_k
/// Classes with a zero denominator get NaN and are left out of the mean.
struct PlusMinusOneScores {
  std::vector<double> recall;
  std::vector<double> precision;
  double mean_recall = 0.0;
  double mean_precision = 0.0;
  double f1 = 0.0;
  std::vector<std::string> warnings;
};

PlusMinusOneScores prf_pm1(const ConfusionMatrix& cm);

/// Among misclassified samples, the fraction predicted in an adjacent class.
/// NaN when there are no errors.
double adjacent_error_fraction(const ConfusionMatrix& cm);

struct MetricSummary {
  double acc = 0.0;
  double acc_pm1 = 0.0;
  double mean_recall_pm1 = 0.0;
  double mean_precision_pm1 = 0.0;
  double f1_pm1 = 0.0;
};

MetricSummary summarize(const ConfusionMatrix& cm);

/// Metrics JSON shared by `eval` and the fine-tuning component.
nlohmann::json metrics_to_json(const ConfusionMatrix& cm);
/// "true\\pred,1,..,K" header then one row per true class.
std::string confusion_to_csv(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::json& j);
nlohmann::json confusion_to_json(const ConfusionMatrix& cm);

}  // namespace aet
