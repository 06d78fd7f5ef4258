// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "core/common.hpp"
#include "core/experiments.hpp"
#include "doctest.h"

using namespace aet;

namespace {

std::vector<SampleKey> grid(const std::vector<std::string>& campaigns, int per_class, int k = 7,
                            const std::vector<std::string>& sensors = {"s"}) {
  std::vector<SampleKey> keys;
  for (const auto& c : campaigns) {
    for (const auto& s : sensors) {
      for (int cls = 1; cls <= k; ++cls) {
        for (int i = 0; i < per_class; ++i) keys.push_back({cls, c, s});
      }
    }
  }
  return keys;
}

void check_partition(const SplitIndices& s, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    CHECK(std::is_sorted(part->begin(), part->end()));
    all.insert(all.end(), part->begin(), part->end());
  }
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK(all.size() == n);
}

}  // namespace

TEST_CASE("noshm: 700 items -> 560/70/70, stratified, seeded") {
  const auto keys = grid({"B"}, 100);
  SplitSpec spec;
  spec.mode = SplitMode::noshm;
  spec.seed = 3;
  const auto s = make_split(keys, spec);
  CHECK(s.train.size() == 560);
  CHECK(s.val.size() == 70);
  CHECK(s.test.size() == 70);
  check_partition(s, 700);
  std::map<int, int> val_per_class;
  for (auto i : s.val) ++val_per_class[keys[i].class_index];
  for (int c = 1; c <= 7; ++c) CHECK(val_per_class[c] == 10);
  const auto again = make_split(keys, spec);
  CHECK(again.train == s.train);
  spec.seed = 4;
  CHECK(make_split(keys, spec).train != s.train);
}

TEST_CASE("noshm totals follow round(f N) with uneven classes") {
  std::vector<SampleKey> keys;
  const int counts[] = {3, 5, 11, 4, 9, 7, 6};
  for (int c = 1; c <= 7; ++c) {
    for (int i = 0; i < counts[c - 1]; ++i) keys.push_back({c, "B", "s"});
  }
  SplitSpec spec;
  spec.mode = SplitMode::noshm;
  const auto s = make_split(keys, spec);
  const auto n = static_cast<double>(keys.size());  // 45
  CHECK(s.train.size() == static_cast<std::size_t>(std::llround(0.8 * n)));
  CHECK(s.val.size() == static_cast<std::size_t>(std::llround(0.1 * n)));
  check_partition(s, keys.size());

  keys.push_back({1, "B", "s"});
  keys.erase(keys.begin() + 1, keys.begin() + 3);  // class 1 now has 2 items
  CHECK_THROWS_AS(make_split(keys, spec), Error);
}

TEST_CASE("loco: 5 campaigns x 70 items, test C -> 224/56/70") {
  const auto keys = grid({"B", "C", "D", "E", "F"}, 10);
  SplitSpec spec;
  spec.test_campaign = "C";
  const auto s = make_split(keys, spec);
  CHECK(s.test.size() == 70);
  CHECK(s.train.size() == 224);
  CHECK(s.val.size() == 56);
  check_partition(s, keys.size());
  for (auto i : s.train) CHECK(keys[i].campaign_id != "C");
  for (auto i : s.val) CHECK(keys[i].campaign_id != "C");
  for (auto i : s.test) CHECK(keys[i].campaign_id == "C");
  spec.test_campaign = "Z";
  CHECK_THROWS_AS(make_split(keys, spec), Error);
}

TEST_CASE("loco split sizes at full dataset scale") {
  // 40 slots of ~8064 images per campaign, 7 classes; test = B.
  std::vector<SampleKey> keys;
  const int per_class_test[] = {1152, 1152, 1152, 1152, 1152, 1152, 1152};  // 8064
  for (int c = 1; c <= 7; ++c) {
    for (int i = 0; i < per_class_test[c - 1]; ++i) keys.push_back({c, "B", "s"});
  }
  // 31555 remaining images spread over C..F.
  const std::vector<std::string> others{"C", "D", "E", "F"};
  int placed = 0;
  for (std::size_t ci = 0; ci < others.size(); ++ci) {
    const int n_campaign = ci < 3 ? 7889 : 31555 - 3 * 7889;
    for (int i = 0; i < n_campaign; ++i, ++placed) keys.push_back({1 + i % 7, others[ci], "s"});
  }
  SplitSpec spec;
  spec.test_campaign = "B";
  const auto s = make_split(keys, spec);
  CHECK(s.test.size() == 8064);
  CHECK(s.train.size() == 25244);
  CHECK(s.val.size() == 6311);
}

TEST_CASE("gradual prior") {
  const auto keys = grid({"B", "C", "D", "E", "F"}, 10);
  SplitSpec spec;
  spec.test_campaign = "B";
  spec.seed = 9;
  const auto loco = make_split(keys, spec);
  spec.mode = SplitMode::gradual_prior;
  spec.prior_levels = 0;
  const auto g0 = make_split(keys, spec);
  CHECK(g0.train == loco.train);
  CHECK(g0.val == loco.val);
  CHECK(g0.test == loco.test);

  std::size_t prev = 0;
  for (int p = 0; p <= 6; ++p) {
    spec.prior_levels = p;
    const auto g = make_split(keys, spec);
    check_partition(g, keys.size());
    CHECK(g.train.size() >= prev);
    prev = g.train.size();
    for (auto i : g.test) {
      CHECK(keys[i].campaign_id == "B");
      CHECK(keys[i].class_index > p);
    }
    if (p == 6) {
      std::set<int> test_classes;
      for (auto i : g.test) test_classes.insert(keys[i].class_index);
      CHECK(test_classes == std::set<int>{7});
      for (auto i : g.train) CHECK(!(keys[i].campaign_id == "B" && keys[i].class_index == 7));
    }
  }
  spec.prior_levels = 7;
  CHECK_THROWS_AS(make_split(keys, spec), Error);
}

TEST_CASE("random manifests: every mode partitions its pool") {
  std::mt19937_64 rng(21);
  const std::vector<std::string> camps{"B", "C", "D"};
  for (int t = 0; t < 50; ++t) {
    std::vector<SampleKey> keys;
    const int n = 60 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) keys.push_back({1 + static_cast<int>(rng() % 7), camps[rng() % 3], "s"});
    // Guarantee >= 3 per class per campaign so noshm is valid.
    for (const auto& c : camps) {
      for (int cls = 1; cls <= 7; ++cls) {
        for (int r = 0; r < 3; ++r) keys.push_back({cls, c, "s"});
      }
    }
    SplitSpec spec;
    spec.seed = rng();
    spec.test_campaign = "C";
    for (SplitMode mode : {SplitMode::shm_loco, SplitMode::gradual_prior}) {
      spec.mode = mode;
      spec.prior_levels = static_cast<int>(rng() % 7);
      check_partition(make_split(keys, spec), keys.size());
    }
    spec.mode = SplitMode::noshm;
    const auto s = make_split(keys, spec);
    std::size_t in_c = 0;
    for (const auto& k : keys) in_c += k.campaign_id == "C";
    check_partition(s, in_c);
  }
}

TEST_CASE("sensor selection and fusion") {
  const auto keys = grid({"B", "C"}, 5, 7, {"s1", "s2", "s3"});
  SplitSpec spec;
  spec.test_campaign = "B";
  spec.sensors = {"s2"};
  const auto one = make_split(keys, spec);
  for (const auto* part : {&one.train, &one.val, &one.test}) {
    for (auto i : *part) CHECK(keys[i].sensor_id == "s2");
  }
  check_partition(one, keys.size() / 3);
  spec.sensors.clear();
  const auto fused = make_split(keys, spec);
  std::multiset<std::string> got, expect;
  for (const auto* part : {&fused.train, &fused.val, &fused.test}) {
    for (auto i : *part) got.insert(keys[i].sensor_id);
  }
  for (const auto& k : keys) expect.insert(k.sensor_id);
  CHECK(got == expect);
}

TEST_CASE("split spec json round trip and mode names") {
  SplitSpec s;
  s.mode = SplitMode::gradual_prior;
  s.test_campaign = "E";
  s.prior_levels = 3;
  s.sensors = {"a", "b"};
  s.seed = 77;
  CHECK(split_spec_to_json(split_spec_from_json(split_spec_to_json(s))) == split_spec_to_json(s));
  CHECK(parse_split_mode("loco") == SplitMode::shm_loco);
  CHECK_THROWS_AS(parse_split_mode("kfold"), Error);
}

TEST_CASE("fft length") {
  CHECK(fft_length_for(1) == 2);
  CHECK(fft_length_for(833) == 1024);
  CHECK(fft_length_for(1024) == 1024);
}

TEST_CASE("pipeline and repeated experiments on a small synthetic set") {
  auto spec = default_synthetic_spec();
  spec.seconds_per_level = 0.25;
  const auto pairs = generate_campaigns(spec, {"B", "C", "D"}, {"synthetic"});
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].ae.manifest.campaign_id == "B");
  CHECK(pairs[0].ae.samples != pairs[1].ae.samples);
  PipelineConfig pc;
  pc.jobs = 2;
  const auto data = build_feature_dataset(pairs, pc);
  CHECK(data.size() > 3 * 7 * 25);
  pc.jobs = 1;
  const auto data1 = build_feature_dataset(pairs, pc);
  CHECK(data1.features.values == data.features.values);

  SplitSpec split;
  split.test_campaign = "B";
  split.seed = 1;
  TrainConfig tc;
  const auto r = run_experiment(data, split, tc, 3, 2, "k");
  REQUIRE(r.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(r[static_cast<std::size_t>(i)].repeat == i);
  const auto r1 = run_experiment(data, split, tc, 3, 1, "k");
  for (std::size_t i = 0; i < 3; ++i) CHECK(r1[i].confusion == r[i].confusion);

  const auto csv = results_to_csv(r);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 3 + 1);
  CHECK(csv.find("k,summary,") != std::string::npos);
  const auto sum = summarize_results(r);
  CHECK(sum.repeats == 3);
  CHECK(sum.mean.acc_pm1 >= 0.0);
  CHECK(results_to_json(r).size() == 3);
}
