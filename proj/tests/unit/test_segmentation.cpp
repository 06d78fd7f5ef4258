// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "core/common.hpp"
#include "core/ingest.hpp"
#include "core/segmentation.hpp"
#include "doctest.h"

using namespace aet;

namespace {

AEStream stream_of(std::vector<float> x, std::vector<TorqueInterval> sched, const char* sensor = "s") {
  AEStream s;
  s.manifest.campaign_id = "B";
  s.manifest.sensor_id = sensor;
  s.manifest.sample_rate_hz = 1000.0;
  s.manifest.n_samples = static_cast<std::int64_t>(x.size());
  s.manifest.torque_schedule = std::move(sched);
  s.samples = std::move(x);
  return s;
}

}  // namespace

TEST_CASE("zero crossings by definition") {
  const std::vector<double> x{1.0, 0.5, -0.2, -0.8, 0.3, -0.1};
  CHECK(zero_crossings(std::span<const double>(x)) == std::vector<std::int64_t>{2, 5});
  const std::vector<double> pos(50, 1.0);
  CHECK(zero_crossings(std::span<const double>(pos)).empty());
  const std::vector<double> tie{1.0, 0.0, 1.0, 0.0};
  CHECK(zero_crossings(std::span<const double>(tie)) == std::vector<std::int64_t>{1, 3});
}

TEST_CASE("a 120 Hz sine over 1 s at 5 MHz has exactly 120 crossings") {
  const double fs = 5e6;
  std::vector<double> x(static_cast<std::size_t>(fs));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * 120.0 * (static_cast<double>(i) + 0.5) / fs);
  const auto zc = zero_crossings(std::span<const double>(x));
  CHECK(zc.size() == 120);
  for (std::size_t i = 1; i < zc.size(); ++i) CHECK(zc[i] > zc[i - 1]);
}

TEST_CASE("five crossings under one interval give four segments") {
  std::vector<float> vib(60, 1.0f);
  for (int c : {10, 20, 30, 40, 50}) vib[c] = -1.0f;
  std::vector<float> ae(60);
  for (std::size_t i = 0; i < ae.size(); ++i) ae[i] = static_cast<float>(i);
  const auto segs = segment_cycles(stream_of(ae, {{3, 0, 60}}), stream_of(vib, {{3, 0, 60}}, "vibrometer"));
  REQUIRE(segs.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(segs[j].samples.size() == 10);
    CHECK(segs[j].start_sample == 10 * static_cast<std::int64_t>(j + 1));
    CHECK(segs[j].samples.front() == doctest::Approx(10.0 * static_cast<double>(j + 1)));
    CHECK(segs[j].class_index == 3);
    CHECK(segs[j].campaign_id == "B");
  }
}

TEST_CASE("segments straddling intervals or unlabeled are dropped") {
  std::vector<float> vib(60, 1.0f);
  for (int c : {10, 20, 30, 40, 50}) vib[c] = -1.0f;
  std::vector<float> ae(60, 0.0f);
  // [10,20) in class 1, [20,25) class 2 -> [20,30) straddles; [30,40) unlabeled.
  const auto segs =
      segment_cycles(stream_of(ae, {{1, 0, 20}, {2, 20, 25}, {4, 40, 60}}), stream_of(vib, {{1, 0, 60}}));
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].start_sample == 10);
  CHECK(segs[0].class_index == 1);
  CHECK(segs[1].start_sample == 40);
  CHECK(segs[1].class_index == 4);
}

TEST_CASE("constant-positive vibrometer yields no segments") {
  std::vector<float> ae(100, 0.3f), vib(100, 2.0f);
  CHECK(segment_cycles(stream_of(ae, {{1, 0, 100}}), stream_of(vib, {{1, 0, 100}})).empty());
}

TEST_CASE("streams of different lengths are rejected") {
  std::vector<float> ae(100, 0.0f), vib(90, 1.0f);
  CHECK_THROWS_AS(segment_cycles(stream_of(ae, {{1, 0, 100}}), stream_of(vib, {{1, 0, 90}})), Error);
}

TEST_CASE("synthetic streams: segment count per level") {
  auto spec = default_synthetic_spec();
  const auto g = generate_synthetic(spec);
  const auto segs = segment_cycles(g.ae, g.vibrometer);
  std::vector<int> per_class(8, 0);
  for (const auto& s : segs) ++per_class[static_cast<std::size_t>(s.class_index)];
  for (int c = 1; c <= 7; ++c) CHECK(std::abs(per_class[static_cast<std::size_t>(c)] - 120) <= 1);
  const auto crossings = zero_crossings(std::span<const float>(g.vibrometer.samples));
  CHECK(segs.size() <= crossings.size() - 1);
  CHECK(segment_cycles(g.ae, g.vibrometer).size() == segs.size());
}

TEST_CASE("Hanning window") {
  const auto w = hanning_window(5);
  const std::vector<double> expect{0.0, 0.5, 1.0, 0.5, 0.0};
  for (std::size_t i = 0; i < 5; ++i) CHECK(w[i] == doctest::Approx(expect[i]).epsilon(1e-15));

  CycleSegment seg;
  seg.samples = std::vector<double>(5, 1.0);
  const auto out = apply_hanning(seg);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.samples[i] == doctest::Approx(expect[i]).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (std::size_t n : {2, 3, 17, 833, 1024}) {
    CycleSegment s;
    for (std::size_t i = 0; i < n; ++i) s.samples.push_back(nd(rng));
    const auto o = apply_hanning(s);
    CHECK(o.samples.front() == 0.0);
    CHECK(o.samples.back() == 0.0);
  }
}

TEST_CASE("mean of w^2 tends to 3/8") {
  const auto w = hanning_window(10000);
  double m = 0.0;
  for (double v : w) m += v * v;
  m /= static_cast<double>(w.size());
  CHECK(m == doctest::Approx(0.375).epsilon(1e-3));
}
