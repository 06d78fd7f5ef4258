// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "core/common.hpp"
#include "core/metrics.hpp"
#include "doctest.h"

using namespace aet;

namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) cm.set(static_cast<int>(i) + 1, static_cast<int>(j) + 1, rows[i][j]);
  }
  return cm;
}

// Expands the matrix into samples and scores each one on its own.
struct Brute {
  double acc, acc_pm1, mean_r, mean_p, f1;
};

Brute brute_force(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  std::vector<std::pair<int, int>> samples;
  for (int t = 1; t <= k; ++t) {
    for (int p = 1; p <= k; ++p) {
      for (std::int64_t n = 0; n < cm.count(t, p); ++n) samples.emplace_back(t, p);
    }
  }
  double exact = 0, near = 0;
  std::vector<double> correct(static_cast<std::size_t>(k + 1), 0), truth(static_cast<std::size_t>(k + 1), 0),
      predicted(static_cast<std::size_t>(k + 1), 0);
  for (auto [t, p] : samples) {
    exact += t == p;
    near += std::abs(t - p) <= 1;
    truth[static_cast<std::size_t>(t)] += 1;
    if (std::abs(t - p) <= 1) correct[static_cast<std::size_t>(t)] += 1;
    for (int c = 1; c <= k; ++c) {
      if (std::abs(c - p) <= 1) predicted[static_cast<std::size_t>(c)] += 1;
    }
  }
  double rs = 0, ps = 0;
  int rn = 0, pn = 0;
  for (int c = 1; c <= k; ++c) {
    if (truth[static_cast<std::size_t>(c)] > 0) rs += correct[static_cast<std::size_t>(c)] / truth[static_cast<std::size_t>(c)], ++rn;
    if (predicted[static_cast<std::size_t>(c)] > 0) ps += correct[static_cast<std::size_t>(c)] / predicted[static_cast<std::size_t>(c)], ++pn;
  }
  Brute b{};
  const double n = static_cast<double>(samples.size());
  b.acc = exact / n;
  b.acc_pm1 = near / n;
  b.mean_r = rn ? rs / rn : NAN;
  b.mean_p = pn ? ps / pn : NAN;
  b.f1 = (b.mean_r + b.mean_p) > 0 ? 2 * b.mean_r * b.mean_p / (b.mean_r + b.mean_p) : 0.0;
  return b;
}

}  // namespace

TEST_CASE("accumulate") {
  ConfusionMatrix cm(7);
  cm.accumulate(3, 3);
  CHECK(cm.count(3, 3) == 1);
  cm.accumulate(3, 3);
  CHECK(cm.count(3, 3) == 2);
  cm.accumulate(1, 7);
  CHECK(cm.total() == 3);
  CHECK_THROWS_AS(cm.accumulate(0, 1), Error);
  CHECK_THROWS_AS(cm.accumulate(1, 8), Error);
}

TEST_CASE("diagonal matrix: exact scores and recall are 1, precision counts neighbouring predictions") {
  const auto cm = from_rows({{3, 0, 0}, {0, 2, 0}, {0, 0, 5}});
  CHECK(accuracy(cm) == 1.0);
  CHECK(accuracy_pm1(cm) == 1.0);
  const auto s = prf_pm1(cm);
  for (double r : s.recall) CHECK(r == 1.0);
  CHECK(s.precision[0] == doctest::Approx(3.0 / 5.0));
  CHECK(s.precision[1] == doctest::Approx(2.0 / 10.0));
  CHECK(s.precision[2] == doctest::Approx(5.0 / 7.0));
  // A single class has no neighbours, so every score is 1.
  const auto one = prf_pm1(from_rows({{4}}));
  CHECK(one.precision[0] == 1.0);
  CHECK(one.f1 == 1.0);
}

TEST_CASE("three-class hand example") {
  const auto cm = from_rows({{2, 1, 0}, {0, 1, 1}, {1, 0, 2}});
  CHECK(std::abs(accuracy(cm) - 0.625) < 1e-9);
  CHECK(std::abs(accuracy_pm1(cm) - 0.875) < 1e-9);
  const auto s = prf_pm1(cm);
  CHECK(std::abs(s.recall[0] - 1.0) < 1e-12);
  CHECK(std::abs(s.recall[1] - 1.0) < 1e-12);
  CHECK(std::abs(s.recall[2] - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(s.precision[0] - 3.0 / 5.0) < 1e-12);
  CHECK(std::abs(s.precision[1] - 2.0 / 8.0) < 1e-12);
  CHECK(std::abs(s.precision[2] - 2.0 / 5.0) < 1e-12);
  CHECK(std::abs(s.mean_recall - 0.8888888888888888) < 1e-9);
  CHECK(std::abs(s.mean_precision - 0.4166666666666667) < 1e-9);
  const double f1 = 2 * (8.0 / 9.0) * (1.25 / 3.0) / (8.0 / 9.0 + 1.25 / 3.0);
  CHECK(std::abs(s.f1 - f1) < 1e-12);
  CHECK(std::abs(s.f1 - 0.5674) < 1e-4);
}

TEST_CASE("tridiagonal matrices always have acc_pm1 = 1") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + static_cast<int>(rng() % 8);
    ConfusionMatrix cm(k);
    for (int i = 1; i <= k; ++i) {
      for (int j = std::max(1, i - 1); j <= std::min(k, i + 1); ++j) cm.set(i, j, 1 + static_cast<std::int64_t>(rng() % 20));
    }
    CHECK(accuracy_pm1(cm) == 1.0);
  }
  // The seven-class all-ones tridiagonal example: 7 of 19 samples on the diagonal.
  ConfusionMatrix b(7);
  for (int i = 1; i <= 7; ++i) {
    for (int j = std::max(1, i - 1); j <= std::min(7, i + 1); ++j) b.set(i, j, 1);
  }
  CHECK(accuracy(b) == doctest::Approx(7.0 / 19.0));
  CHECK(accuracy_pm1(b) == 1.0);
}

TEST_CASE("agreement with a per-sample brute force on random matrices") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 8);
    ConfusionMatrix cm(k);
    for (int i = 1; i <= k; ++i) {
      for (int j = 1; j <= k; ++j) cm.set(i, j, rng() % 3 == 0 ? 0 : static_cast<std::int64_t>(rng() % 6));
    }
    if (cm.total() == 0) cm.set(1, 1, 1);
    const auto b = brute_force(cm);
    const auto s = prf_pm1(cm);
    CHECK(accuracy(cm) == doctest::Approx(b.acc).epsilon(1e-14));
    CHECK(accuracy_pm1(cm) == doctest::Approx(b.acc_pm1).epsilon(1e-14));
    CHECK(s.mean_recall == doctest::Approx(b.mean_r).epsilon(1e-14));
    CHECK(s.mean_precision == doctest::Approx(b.mean_p).epsilon(1e-14));
    CHECK(s.f1 == doctest::Approx(b.f1).epsilon(1e-14));
    CHECK(accuracy(cm) <= accuracy_pm1(cm));
  }
}

TEST_CASE("order of accumulation and merging do not matter") {
  std::mt19937_64 rng(6);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 500; ++i) pairs.emplace_back(1 + static_cast<int>(rng() % 7), 1 + static_cast<int>(rng() % 7));
  ConfusionMatrix a(7), b(7), part1(7), part2(7);
  for (auto [t, p] : pairs) a.accumulate(t, p);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    b.accumulate(pairs[i].first, pairs[i].second);
    (i % 2 ? part1 : part2).accumulate(pairs[i].first, pairs[i].second);
  }
  part1.merge(part2);
  CHECK(a == b);
  CHECK(a == part1);
  CHECK(metrics_to_json(a) == metrics_to_json(b));
}

TEST_CASE("empty classes are skipped with a warning") {
  const auto cm = from_rows({{4, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 3}});
  const auto s = prf_pm1(cm);
  CHECK(std::isnan(s.recall[1]));
  CHECK(!s.warnings.empty());
  CHECK(s.mean_recall == 1.0);
  const auto j = metrics_to_json(cm);
  CHECK(j["recall_pm1"][1].is_null());
  CHECK(j["warnings"].size() == s.warnings.size());
}

TEST_CASE("adjacent error fraction") {
  const auto cm = from_rows({{5, 2, 1}, {0, 5, 0}, {1, 0, 5}});
  CHECK(adjacent_error_fraction(cm) == doctest::Approx(2.0 / 4.0));
  CHECK(std::isnan(adjacent_error_fraction(from_rows({{1, 0}, {0, 1}}))));
}

TEST_CASE("json and csv round trips") {
  const auto cm = from_rows({{2, 1, 0}, {0, 1, 1}, {1, 0, 2}});
  CHECK(confusion_from_json(confusion_to_json(cm)) == cm);
  CHECK(confusion_to_csv(cm) == "true\\pred,1,2,3\n1,2,1,0\n2,0,1,1\n3,1,0,2\n");
  const auto j = metrics_to_json(cm);
  for (const char* key : {"num_classes", "n", "acc", "acc_pm1", "mean_recall_pm1", "mean_precision_pm1", "f1_pm1",
                          "recall_pm1", "precision_pm1", "confusion", "warnings"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["n"] == 8);
}

TEST_CASE("metrics JSON matches the shared golden fixture") {
  const auto fixture = nlohmann::json::parse(read_text_file(AET_FIXTURES "/metrics_cases.json"));
  REQUIRE(fixture["cases"].size() >= 3);
  for (const auto& c : fixture["cases"]) {
    const auto cm = confusion_from_json(c["confusion"]);
    CHECK(metrics_to_json(cm).dump() == c["expected"].dump());
  }
}
