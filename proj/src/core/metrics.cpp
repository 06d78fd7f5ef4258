// SPDX-License-Identifier: Apache-2.0
#include "core/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/common.hpp"

namespace aet {

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes) {
  if (num_classes < 1) fail(ErrorCode::invalid_argument, "confusion matrix needs K >= 1");
  m_.assign(static_cast<std::size_t>(k_) * static_cast<std::size_t>(k_), 0);
}

std::size_t ConfusionMatrix::index(int true_class, int predicted_class) const {
  if (true_class < 1 || true_class > k_ || predicted_class < 1 || predicted_class > k_) {
    fail(ErrorCode::invalid_argument, "class pair (" + std::to_string(true_class) + ", " +
                                          std::to_string(predicted_class) + ") outside 1.." + std::to_string(k_));
  }
  return static_cast<std::size_t>(true_class - 1) * static_cast<std::size_t>(k_) +
         static_cast<std::size_t>(predicted_class - 1);
}

void ConfusionMatrix::accumulate(int true_class, int predicted_class) {
  ++m_[index(true_class, predicted_class)];
  ++total_;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) fail(ErrorCode::invalid_argument, "cannot merge confusion matrices of different K");
  for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += other.m_[i];
  total_ += other.total_;
}

std::int64_t ConfusionMatrix::count(int true_class, int predicted_class) const {
  return m_[index(true_class, predicted_class)];
}

void ConfusionMatrix::set(int true_class, int predicted_class, std::int64_t value) {
  if (value < 0) fail(ErrorCode::invalid_argument, "confusion counts must be >= 0");
  auto& cell = m_[index(true_class, predicted_class)];
  total_ += value - cell;
  cell = value;
}

std::int64_t ConfusionMatrix::row_total(int true_class) const {
  std::int64_t n = 0;
  for (int j = 1; j <= k_; ++j) n += count(true_class, j);
  return n;
}

namespace {

void require_samples(const ConfusionMatrix& cm) {
  if (cm.total() == 0) fail(ErrorCode::invalid_argument, "metrics of an empty confusion matrix");
}

std::int64_t near_row_mass(const ConfusionMatrix& cm, int k) {
  std::int64_t n = 0;
  for (int j = std::max(1, k - 1); j <= std::min(cm.num_classes(), k + 1); ++j) n += cm.count(k, j);
  return n;
}

}  // namespace

double accuracy(const ConfusionMatrix& cm) {
  require_samples(cm);
  std::int64_t diag = 0;
  for (int i = 1; i <= cm.num_classes(); ++i) diag += cm.count(i, i);
  return static_cast<double>(diag) / static_cast<double>(cm.total());
}

double accuracy_pm1(const ConfusionMatrix& cm) {
  require_samples(cm);
  std::int64_t near = 0;
  for (int i = 1; i <= cm.num_classes(); ++i) near += near_row_mass(cm, i);
  return static_cast<double>(near) / static_cast<double>(cm.total());
}

PlusMinusOneScores prf_pm1(const ConfusionMatrix& cm) {
  require_samples(cm);
  const int k = cm.num_classes();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  PlusMinusOneScores s;
  s.recall.assign(static_cast<std::size_t>(k), nan);
  s.precision.assign(static_cast<std::size_t>(k), nan);
  double recall_sum = 0.0, precision_sum = 0.0;
  int recall_n = 0, precision_n = 0;
  for (int c = 1; c <= k; ++c) {
    const auto correct = static_cast<double>(near_row_mass(cm, c));
    const auto n_c = static_cast<double>(cm.row_total(c));
    std::int64_t predicted = 0;
    for (int i = 1; i <= k; ++i) {
      for (int j = std::max(1, c - 1); j <= std::min(k, c + 1); ++j) predicted += cm.count(i, j);
    }
    const auto idx = static_cast<std::size_t>(c - 1);
    if (n_c > 0) {
      s.recall[idx] = correct / n_c;
      recall_sum += s.recall[idx];
      ++recall_n;
    } else {
      s.warnings.push_back("class " + std::to_string(c) + " has no true samples; excluded from mean recall");
    }
    if (predicted > 0) {
      s.precision[idx] = correct / static_cast<double>(predicted);
      precision_sum += s.precision[idx];
      ++precision_n;
    } else {
      s.warnings.push_back("class " + std::to_string(c) + " has no predictions nearby; excluded from mean precision");
    }
  }
  s.mean_recall = recall_n ? recall_sum / recall_n : 0.0;
  s.mean_precision = precision_n ? precision_sum / precision_n : 0.0;
  const double denom = s.mean_recall + s.mean_precision;
  s.f1 = denom > 0.0 ? 2.0 * s.mean_recall * s.mean_precision / denom : 0.0;
  return s;
}

double adjacent_error_fraction(const ConfusionMatrix& cm) {
  std::int64_t errors = 0, adjacent = 0;
  for (int i = 1; i <= cm.num_classes(); ++i) {
    for (int j = 1; j <= cm.num_classes(); ++j) {
      if (i == j) continue;
      errors += cm.count(i, j);
      if (std::abs(i - j) == 1) adjacent += cm.count(i, j);
    }
  }
  if (errors == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(adjacent) / static_cast<double>(errors);
}

MetricSummary summarize(const ConfusionMatrix& cm) {
  const auto s = prf_pm1(cm);
  return {accuracy(cm), accuracy_pm1(cm), s.mean_recall, s.mean_precision, s.f1};
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 1; i <= cm.num_classes(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 1; j <= cm.num_classes(); ++j) row.push_back(cm.count(i, j));
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorCode::format, "confusion matrix must be a non-empty array of rows");
  const int k = static_cast<int>(j.size());
  ConfusionMatrix cm(k);
  for (int r = 0; r < k; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != k) fail(ErrorCode::format, "confusion matrix must be square");
    for (int c = 0; c < k; ++c) cm.set(r + 1, c + 1, row[static_cast<std::size_t>(c)].get<std::int64_t>());
  }
  return cm;
}

nlohmann::json metrics_to_json(const ConfusionMatrix& cm) {
  const auto s = prf_pm1(cm);
  auto nullable = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
    return a;
  };
  return {{"num_classes", cm.num_classes()},
          {"n", cm.total()},
          {"acc", accuracy(cm)},
          {"acc_pm1", accuracy_pm1(cm)},
          {"mean_recall_pm1", s.mean_recall},
          {"mean_precision_pm1", s.mean_precision},
          {"f1_pm1", s.f1},
          {"recall_pm1", nullable(s.recall)},
          {"precision_pm1", nullable(s.precision)},
          {"confusion", confusion_to_json(cm)},
          {"warnings", s.warnings}};
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\pred";
  for (int j = 1; j <= cm.num_classes(); ++j) out << ',' << j;
  out << '\n';
  for (int i = 1; i <= cm.num_classes(); ++i) {
    out << i;
    for (int j = 1; j <= cm.num_classes(); ++j) out << ',' << cm.count(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace aet
