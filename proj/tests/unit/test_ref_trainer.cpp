// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "core/common.hpp"
#include "core/ref_trainer.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aet;

namespace {

Scalogram random_scalogram(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Scalogram s;
  s.n_scales = rows;
  s.n_time = cols;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (std::size_t i = 0; i < rows * cols; ++i) s.magnitudes.push_back(u(rng));
  return s;
}

// Gaussian clusters whose mean moves along a line with the class index.
LabeledFeatures ordinal_clusters(std::size_t per_class, std::uint64_t seed, double spread = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, spread);
  LabeledFeatures out;
  out.dim = 8;
  std::vector<double> x(8);
  for (int c = 1; c <= 7; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < 8; ++d) x[d] = (d < 2 ? static_cast<double>(c) : 0.0) + nd(rng);
      out.push_back(x, c);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("featurize: constant in, constant out; mean preserving; linear") {
  Scalogram c;
  c.n_scales = 96;
  c.n_time = 833;
  c.magnitudes.assign(96 * 833, 0.75);
  for (double v : featurize(c)) CHECK(v == doctest::Approx(0.75).epsilon(1e-12));

  for (auto [r, t] : {std::pair<std::size_t, std::size_t>{96, 833}, {12, 700}, {7, 5}, {16, 16}}) {
    const auto s = random_scalogram(r, t, r * t);
    const auto f = featurize(s);
    REQUIRE(f.size() == kFeatureDim);
    double mf = 0, ms = 0;
    for (double v : f) mf += v;
    for (double v : s.magnitudes) ms += v;
    CHECK(mf / static_cast<double>(f.size()) == doctest::Approx(ms / static_cast<double>(s.magnitudes.size())).epsilon(1e-9));
    auto s2 = s;
    for (auto& v : s2.magnitudes) v *= 2.0;
    const auto f2 = featurize(s2);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f2[i] == doctest::Approx(2.0 * f[i]).epsilon(1e-12));
  }
}

TEST_CASE("predict: zero model is uniform, outputs sum to one, bias shift invariance") {
  auto m = LinearSoftmaxModel::zeros(7, 4);
  const std::vector<double> x{1.0, -2.0, 0.5, 3.0};
  for (double p : predict(m, x)) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (auto& v : m.parameters) v = nd(rng);
  const auto p = predict(m, x);
  double s = 0;
  for (double v : p) s += v;
  CHECK(std::abs(s - 1.0) < 1e-9);
  auto shifted = m;
  for (int c = 1; c <= 7; ++c) shifted.parameters[7 * 4 + static_cast<std::size_t>(c - 1)] += 12.5;
  const auto q = predict(shifted, x);
  for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(q[i] - p[i]) < 1e-9);
}

TEST_CASE("standardizer is fitted on the given data only") {
  LabeledFeatures d;
  d.dim = 2;
  d.push_back(std::vector<double>{1.0, 5.0}, 1);
  d.push_back(std::vector<double>{3.0, 5.0}, 2);
  const auto st = Standardizer::fit(d);
  CHECK(st.mean[0] == 2.0);
  CHECK(st.mean[1] == 5.0);
  CHECK(st.scale[0] == doctest::Approx(1.0));
  CHECK(st.scale[1] == 1.0);  // constant feature keeps unit scale
}

TEST_CASE("zero epochs return the initialization; same seed gives the same model") {
  const auto data = ordinal_clusters(20, 3);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 5;
  const auto a = train(data, {}, cfg);
  CHECK(a.log.empty());
  std::mt19937_64 init_rng(mix_seed(5, 11));
  std::normal_distribution<double> gauss(0.0, 0.01);
  for (std::size_t i = 0; i < 7 * 8; ++i) CHECK(a.model.parameters[i] == gauss(init_rng));
  for (std::size_t i = 7 * 8; i < a.model.parameters.size(); ++i) CHECK(a.model.parameters[i] == 0.0);

  cfg.epochs = 2;
  const auto b1 = train(data, data, cfg);
  const auto b2 = train(data, data, cfg);
  CHECK(b1.model.parameters == b2.model.parameters);
  cfg.seed = 6;
  CHECK(train(data, data, cfg).model.parameters != b1.model.parameters);
}

TEST_CASE("training log: lr column equals the schedule exactly; validation cadence") {
  const auto data = ordinal_clusters(30, 4);
  TrainConfig cfg;
  cfg.val_every = 7;
  const auto r = train(data, data, cfg);
  const std::int64_t per_epoch = (210 + 7) / 8;
  REQUIRE(static_cast<std::int64_t>(r.log.size()) == per_epoch * 3);
  OneCycleConfig oc;
  oc.lr_max = cfg.lr_max;
  oc.total_iterations = per_epoch * 3 - 1;
  for (const auto& row : r.log) {
    CHECK(row.lr == lr_at(oc, row.iteration));
    const bool expect_val = row.iteration % 7 == 0 || row.iteration + 1 == per_epoch * 3;
    CHECK(row.val_acc.has_value() == expect_val);
  }
  CHECK(r.log.front().lr == doctest::Approx(0.01 / 25));
  const auto csv = train_log_to_csv(r.log);
  CHECK(csv.rfind("iteration,epoch,lr,train_loss,val_acc,val_acc_pm1\n", 0) == 0);
}

TEST_CASE("separable ordinal clusters are learned with POM1b") {
  const auto tr = ordinal_clusters(60, 10, 0.2), va = ordinal_clusters(20, 11, 0.2);
  TrainConfig cfg;
  cfg.loss = LossKind::pom1b;
  const auto r = train(tr, va, cfg);
  CHECK(*r.log.back().val_acc_pm1 >= 0.9);
  CHECK(accuracy_pm1(evaluate(r.model, va)) >= 0.9);
}

TEST_CASE("every loss and optimizer trains without numeric trouble") {
  const auto tr = ordinal_clusters(20, 12);
  for (LossKind loss : kAllLossKinds) {
    for (OptimizerKind opt : {OptimizerKind::sgdm, OptimizerKind::adamw}) {
      for (ScheduleKind sk : {ScheduleKind::onecycle, ScheduleKind::constant, ScheduleKind::piecewise}) {
        TrainConfig cfg;
        cfg.loss = loss;
        cfg.optimizer = opt;
        cfg.schedule = sk;
        const auto r = train(tr, tr, cfg);
        for (double v : r.model.parameters) REQUIRE(std::isfinite(v));
      }
    }
  }
}

TEST_CASE("missing classes and bad configs are errors") {
  auto data = ordinal_clusters(5, 1);
  LabeledFeatures partial;
  partial.dim = data.dim;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] != 4) partial.push_back(data.row(i), data.labels[i]);
  }
  CHECK_THROWS_AS(train(partial, {}, TrainConfig{}), Error);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(data, {}, bad), Error);
  bad = TrainConfig{};
  bad.lr_max = 1e6;
  bad.optimizer = OptimizerKind::sgdm;
  bad.schedule = ScheduleKind::constant;
  bad.loss = LossKind::cdw2;
  try {
    train(data, {}, bad);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numeric);
  }
}

TEST_CASE("model file round trip") {
  const auto dir = scratch_dir("model");
  const auto data = ordinal_clusters(10, 2);
  const auto r = train(data, {}, TrainConfig{});
  save_model(r.model, dir + "/m.bin");
  const auto back = load_model(dir + "/m.bin");
  CHECK(back.parameters == r.model.parameters);
  CHECK(back.standardizer.mean == r.model.standardizer.mean);
  CHECK(back.standardizer.scale == r.model.standardizer.scale);
  CHECK(back.num_classes == 7);
  CHECK(back.feature_dim == 8);
  CHECK(back.loss == r.model.loss);
  write_text_file(dir + "/bad.bin", "NOTAMODEL");
  CHECK_THROWS_AS(load_model(dir + "/bad.bin"), Error);
  CHECK_THROWS_AS(load_model(dir + "/missing.bin"), Error);
}

TEST_CASE("train config json round trip") {
  TrainConfig c;
  c.loss = LossKind::cdf;
  c.optimizer = OptimizerKind::sgdm;
  c.schedule = ScheduleKind::piecewise;
  c.seed = 1234567890123ULL;
  CHECK(train_config_to_json(train_config_from_json(train_config_to_json(c))) == train_config_to_json(c));
}
