// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "core/common.hpp"
#include "core/ingest.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aet;
namespace fs = std::filesystem;

namespace {

AEStream small_stream(std::vector<float> samples) {
  AEStream s;
  s.manifest.campaign_id = "B";
  s.manifest.sensor_id = "s1";
  s.manifest.sample_rate_hz = 1000.0;
  s.manifest.n_samples = static_cast<std::int64_t>(samples.size());
  if (!samples.empty()) s.manifest.torque_schedule = {{1, 0, s.manifest.n_samples}};
  s.samples = std::move(samples);
  return s;
}

std::vector<unsigned char> bytes_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("empty stream writes a 0-byte payload and a valid manifest") {
  const auto dir = scratch_dir("empty");
  const auto s = small_stream({});
  write_stream(s, dir + "/e");
  CHECK(fs::file_size(dir + "/e.f32le") == 0);
  const auto back = read_stream(dir + "/e.json");
  CHECK(back.samples.empty());
  CHECK(back.manifest == s.manifest);
}

TEST_CASE("three samples give a 12-byte little-endian payload") {
  const auto dir = scratch_dir("three");
  write_stream(small_stream({1.0f, -2.5f, 0.0f}), dir + "/t");
  const auto b = bytes_of(dir + "/t.f32le");
  REQUIRE(b.size() == 12);
  // 1.0f = 0x3f800000, -2.5f = 0xc0200000
  CHECK(b[0] == 0x00);
  CHECK(b[3] == 0x3f);
  CHECK(b[2] == 0x80);
  CHECK(b[7] == 0xc0);
  CHECK(b[6] == 0x20);
  CHECK(read_stream(dir + "/t.f32le").samples == std::vector<float>{1.0f, -2.5f, 0.0f});
}

TEST_CASE("round trip is bit exact for random streams") {
  const auto dir = scratch_dir("roundtrip");
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<float> x(1 + rng() % 5000);
    for (auto& v : x) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()) & 0xff7fffffu);  // finite values
    const auto s = small_stream(x);
    write_stream(s, dir + "/r");
    const auto back = read_stream(dir + "/r");
    REQUIRE(back.samples.size() == x.size());
    CHECK(std::memcmp(back.samples.data(), x.data(), x.size() * 4) == 0);
  }
}

TEST_CASE("1e6-sample synthetic stream round-trips byte for byte") {
  const auto dir = scratch_dir("big");
  auto spec = default_synthetic_spec();
  spec.n_levels = 5;
  spec.set_log_spaced_freqs(24e3, 4e3);
  spec.seconds_per_level = 2.0;  // 5 levels of 200000 samples
  const auto g = generate_synthetic(spec);
  REQUIRE(g.ae.samples.size() == 1000000);
  write_stream(g.ae, dir + "/big");
  const auto first = bytes_of(dir + "/big.f32le");
  const auto back = read_stream(dir + "/big");
  write_stream(back, dir + "/big2");
  CHECK(first == bytes_of(dir + "/big2.f32le"));
  CHECK(back == g.ae);
}

TEST_CASE("payload shorter than the manifest is a length mismatch") {
  const auto dir = scratch_dir("mismatch");
  std::vector<float> x(100, 0.5f);
  write_stream(small_stream(x), dir + "/m");
  fs::resize_file(dir + "/m.f32le", 99 * 4);
  try {
    read_stream(dir + "/m");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
}

TEST_CASE("manifest validation") {
  auto s = small_stream(std::vector<float>(100, 0.0f));
  SUBCASE("overlapping intervals") {
    s.manifest.torque_schedule = {{1, 0, 60}, {2, 50, 100}};
    CHECK_THROWS_AS(validate_stream(s), Error);
  }
  SUBCASE("interval beyond the stream") {
    s.manifest.torque_schedule = {{1, 0, 101}};
    CHECK_THROWS_AS(validate_stream(s), Error);
  }
  SUBCASE("class outside 1..K") {
    s.manifest.torque_schedule = {{8, 0, 100}};
    CHECK_THROWS_AS(validate_stream(s), Error);
  }
  SUBCASE("non-positive sample rate") {
    s.manifest.sample_rate_hz = 0.0;
    CHECK_THROWS_AS(validate_stream(s), Error);
  }
  SUBCASE("unknown encoding is rejected on read") {
    const auto dir = scratch_dir("encoding");
    write_stream(s, dir + "/x");
    auto j = nlohmann::json::parse(read_text_file(dir + "/x.json"));
    j["encoding"] = "f64be";
    write_text_file(dir + "/x.json", j.dump());
    CHECK_THROWS_AS(read_stream(dir + "/x"), Error);
  }
}

TEST_CASE("class lookup uses half-open intervals") {
  StreamManifest m;
  m.torque_schedule = {{1, 0, 10}, {2, 10, 20}};
  CHECK(m.class_at(0) == 1);
  CHECK(m.class_at(9) == 1);
  CHECK(m.class_at(10) == 2);
  CHECK(m.class_at(20) == 0);
  CHECK(m.interval_index_at(15) == 1);
  CHECK(m.interval_index_at(-1) == -1);
}

TEST_CASE("synthetic streams: sizes, determinism, schedule coverage") {
  auto spec = default_synthetic_spec();
  const auto a = generate_synthetic(spec);
  CHECK(a.ae.samples.size() == 700000);
  CHECK(a.vibrometer.samples.size() == 700000);
  const auto b = generate_synthetic(spec);
  CHECK(a.ae == b.ae);
  CHECK(a.vibrometer == b.vibrometer);
  spec.seed = 2;
  CHECK(generate_synthetic(spec).ae != a.ae);

  const auto& sched = a.ae.manifest.torque_schedule;
  REQUIRE(sched.size() == 7);
  for (std::size_t i = 0; i < sched.size(); ++i) {
    CHECK(sched[i].class_index == static_cast<int>(i) + 1);
    if (i > 0) CHECK(sched[i].start_sample >= sched[i - 1].end_sample);
  }
  CHECK(a.vibrometer.manifest.sensor_id == "vibrometer");
}

TEST_CASE("synthetic peak-to-peak SNR matches the request") {
  for (double snr : {2.3, -3.0, 10.0}) {
    auto spec = default_synthetic_spec();
    spec.snr_db = snr;
    spec.seconds_per_level = 0.2;
    const auto parts = generate_synthetic_parts(spec);
    CHECK(std::abs(peak_to_peak_snr_db(parts.clean, parts.noise) - snr) < 0.5);
  }
}

TEST_CASE("SNR arithmetic: 36 V vs 21 V peak to peak") {
  std::vector<double> clean{-18.0, 18.0}, noise{-10.5, 10.5};
  CHECK(peak_to_peak_snr_db(clean, noise) == doctest::Approx(10.0 * std::log10(36.0 / 21.0)).epsilon(1e-12));
  CHECK(10.0 * std::log10(36.0 / 21.0) == doctest::Approx(2.34).epsilon(0.01));
}

TEST_CASE("synthetic spec validation and json round trip") {
  auto spec = default_synthetic_spec();
  CHECK(spec.class_burst_freqs_hz.size() == 7);
  for (std::size_t i = 1; i < spec.class_burst_freqs_hz.size(); ++i) {
    CHECK(spec.class_burst_freqs_hz[i] < spec.class_burst_freqs_hz[i - 1]);
  }
  const auto back = synthetic_spec_from_json(synthetic_spec_to_json(spec));
  CHECK(synthetic_spec_to_json(back) == synthetic_spec_to_json(spec));
  spec.class_burst_freqs_hz[0] = 60e3;  // above Nyquist
  CHECK_THROWS_AS(validate_synthetic_spec(spec), Error);
}
