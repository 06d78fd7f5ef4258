// SPDX-License-Identifier: Apache-2.0
#include <filesystem>

#include "core/common.hpp"
#include "core/dataset.hpp"
#include "core/segmentation.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace aet;
namespace fs = std::filesystem;

TEST_CASE("segment store round trip") {
  const auto dir = scratch_dir("segments");
  std::vector<CycleSegment> segs(3);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    segs[i].samples = std::vector<double>(10 + i, 0.25 * static_cast<double>(i + 1));
    segs[i].class_index = static_cast<int>(i) + 1;
    segs[i].campaign_id = "C";
    segs[i].sensor_id = "s" + std::to_string(i);
    segs[i].cycle_index = static_cast<std::int64_t>(i) * 7;
    segs[i].start_sample = static_cast<std::int64_t>(i) * 100;
  }
  write_segment_store(dir, segs, 1000.0, true);
  const auto store = read_segment_store(dir);
  REQUIRE(store.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(store.records[i].class_index == segs[i].class_index);
    CHECK(store.records[i].sensor_id == segs[i].sensor_id);
    CHECK(store.records[i].cycle_index == segs[i].cycle_index);
    CHECK(store.records[i].start_sample == segs[i].start_sample);
    CHECK(store.records[i].windowed);
    CHECK(store.segment_samples(i) == segs[i].samples);
  }
  CHECK(fs::file_size(dir + "/segments.f32le") == (10 + 11 + 12) * 4);
}

TEST_CASE("dataset manifests store relative paths and resolve them on read") {
  const auto dir = scratch_dir("manifest");
  fs::create_directories(dir + "/png");
  fs::create_directories(dir + "/split");
  std::vector<DatasetEntry> entries;
  std::vector<double> rows;
  for (int i = 0; i < 14; ++i) {
    DatasetEntry e;
    e.path = dir + "/png/x" + std::to_string(i) + ".png";
    e.class_index = 1 + i % 7;
    e.campaign_id = "B";
    e.sensor_id = "synthetic";
    e.cycle_index = i;
    e.features_file = dir + "/features.f32le";
    e.feature_row = i;
    entries.push_back(e);
    for (std::size_t d = 0; d < kFeatureDim; ++d) rows.push_back(i + 0.5);
  }
  write_feature_file(dir + "/features.f32le", rows, kFeatureDim);
  write_dataset_manifest(dir + "/split/train.jsonl", entries);
  const auto text = read_text_file(dir + "/split/train.jsonl");
  CHECK(text.find("\"../png/x0.png\"") != std::string::npos);
  CHECK(text.find(dir) == std::string::npos);

  const auto back = read_dataset_manifest(dir + "/split/train.jsonl");
  REQUIRE(back.size() == 14);
  CHECK(fs::equivalent(fs::path(back[3].path).parent_path(), dir + "/png"));
  CHECK(back[3].class_index == 4);
  const auto f = load_features(back);
  CHECK(f.size() == 14);
  CHECK(f.row(5)[0] == 5.5);
  std::vector<int> hist(8, 0);
  for (int y : f.labels) ++hist[static_cast<std::size_t>(y)];
  for (int c = 1; c <= 7; ++c) CHECK(hist[static_cast<std::size_t>(c)] == 2);
}

TEST_CASE("bad manifests are itemized errors") {
  const auto dir = scratch_dir("bad");
  write_text_file(dir + "/m.jsonl", "{\"path\": \"a.png\", \"class\": 1, \"campaign\": \"B\", \"sensor\": \"s\"}\nnot json\n");
  try {
    read_dataset_manifest(dir + "/m.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::format);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  write_text_file(dir + "/n.jsonl", "{\"path\": \"a.png\", \"class\": 1, \"campaign\": \"B\", \"sensor\": \"s\"}\n");
  CHECK_THROWS_AS(load_features(read_dataset_manifest(dir + "/n.jsonl")), Error);
}
