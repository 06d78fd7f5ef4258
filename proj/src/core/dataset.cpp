// SPDX-License-Identifier: Apache-2.0
#include "core/dataset.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace aet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_f32le(std::ofstream& out, std::span<const float> values) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    words[i] = w;
  }
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
}

std::vector<float> read_f32le(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  const auto bytes = fs::file_size(path);
  if (bytes % 4 != 0) fail(ErrorCode::format, path + ": size is not a multiple of 4");
  std::vector<std::uint32_t> words(bytes / 4);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!in) fail(ErrorCode::io, "read failed: " + path);
  std::vector<float> out(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::uint32_t w = words[i];
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    out[i] = std::bit_cast<float>(w);
  }
  return out;
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::format, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::string relative_to(const std::string& target, const fs::path& base_dir) {
  if (target.empty()) return target;
  const fs::path abs_target = fs::absolute(target).lexically_normal();
  const fs::path abs_base = fs::absolute(base_dir).lexically_normal();
  const fs::path rel = abs_target.lexically_relative(abs_base);
  return rel.empty() ? abs_target.string() : rel.generic_string();
}

std::string resolve(const std::string& stored, const fs::path& base_dir) {
  if (stored.empty()) return stored;
  const fs::path p(stored);
  return (p.is_absolute() ? p : (base_dir / p)).lexically_normal().string();
}

}  // namespace

std::vector<double> SegmentStore::segment_samples(std::size_t i) const {
  const auto& r = records.at(i);
  const auto begin = samples.begin() + r.offset;
  return {begin, begin + r.length};
}

void write_segment_store(const std::string& dir, const std::vector<CycleSegment>& segments, double sample_rate_hz,
                         bool windowed) {
  fs::create_directories(dir);
  std::ofstream payload(fs::path(dir) / "segments.f32le", std::ios::binary | std::ios::trunc);
  if (!payload) fail(ErrorCode::io, "cannot write segments.f32le in " + dir);
  std::ostringstream index;
  std::int64_t offset = 0;
  for (const auto& s : segments) {
    std::vector<float> f(s.samples.begin(), s.samples.end());
    write_f32le(payload, f);
    const json row = {{"campaign", s.campaign_id},        {"sensor", s.sensor_id},
                      {"class", s.class_index},           {"cycle_index", s.cycle_index},
                      {"start_sample", s.start_sample},   {"length", s.samples.size()},
                      {"offset", offset},                 {"sample_rate_hz", sample_rate_hz},
                      {"windowed", windowed}};
    index << row.dump() << '\n';
    offset += static_cast<std::int64_t>(s.samples.size());
  }
  if (!payload) fail(ErrorCode::io, "write failed: segments.f32le");
  write_text_file((fs::path(dir) / "segments.jsonl").string(), index.str());
}

SegmentStore read_segment_store(const std::string& dir) {
  SegmentStore store;
  store.samples = read_f32le((fs::path(dir) / "segments.f32le").string());
  for (const auto& row : read_jsonl((fs::path(dir) / "segments.jsonl").string())) {
    SegmentRecord r;
    try {
      r.campaign_id = row.at("campaign").get<std::string>();
      r.sensor_id = row.at("sensor").get<std::string>();
      r.class_index = row.at("class").get<int>();
      r.cycle_index = row.at("cycle_index").get<std::int64_t>();
      r.start_sample = row.at("start_sample").get<std::int64_t>();
      r.length = row.at("length").get<std::int64_t>();
      r.offset = row.at("offset").get<std::int64_t>();
      r.sample_rate_hz = row.at("sample_rate_hz").get<double>();
      r.windowed = row.value("windowed", true);
    } catch (const json::exception& e) {
      fail(ErrorCode::format, "segments.jsonl: " + std::string(e.what()));
    }
    if (r.offset < 0 || r.length < 2 || r.offset + r.length > static_cast<std::int64_t>(store.samples.size())) {
      fail(ErrorCode::format, "segments.jsonl: record outside the payload");
    }
    store.records.push_back(std::move(r));
  }
  return store;
}

void write_dataset_manifest(const std::string& manifest_path, const std::vector<DatasetEntry>& entries) {
  const fs::path base = fs::path(manifest_path).parent_path();
  std::ostringstream out;
  for (const auto& e : entries) {
    json row = {{"path", relative_to(e.path, base)},
                {"class", e.class_index},
                {"campaign", e.campaign_id},
                {"sensor", e.sensor_id},
                {"cycle_index", e.cycle_index}};
    if (!e.features_file.empty()) {
      row["features"] = relative_to(e.features_file, base);
      row["feature_row"] = e.feature_row;
    }
    out << row.dump() << '\n';
  }
  write_text_file(manifest_path, out.str());
}

std::vector<DatasetEntry> read_dataset_manifest(const std::string& manifest_path) {
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<DatasetEntry> entries;
  for (const auto& row : read_jsonl(manifest_path)) {
    DatasetEntry e;
    try {
      e.path = resolve(row.value("path", std::string()), base);
      e.class_index = row.at("class").get<int>();
      e.campaign_id = row.at("campaign").get<std::string>();
      e.sensor_id = row.at("sensor").get<std::string>();
      e.cycle_index = row.value("cycle_index", std::int64_t{0});
      e.features_file = resolve(row.value("features", std::string()), base);
      e.feature_row = row.value("feature_row", std::int64_t{-1});
    } catch (const json::exception& ex) {
      fail(ErrorCode::format, manifest_path + ": " + ex.what());
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_feature_file(const std::string& path, const std::vector<double>& rows, std::size_t dim) {
  if (dim == 0 || rows.size() % dim != 0) fail(ErrorCode::invalid_argument, "feature rows are ragged");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  std::vector<float> f(rows.begin(), rows.end());
  write_f32le(out, f);
  if (!out) fail(ErrorCode::io, "write failed: " + path);
}

LabeledFeatures load_features(const std::vector<DatasetEntry>& entries, std::size_t dim) {
  std::map<std::string, std::vector<float>> cache;
  LabeledFeatures out;
  out.dim = dim;
  out.values.reserve(entries.size() * dim);
  std::vector<double> row(dim);
  for (const auto& e : entries) {
    if (e.features_file.empty() || e.feature_row < 0) {
      fail(ErrorCode::format, "dataset entry for " + e.path + " has no feature row");
    }
    auto it = cache.find(e.features_file);
    if (it == cache.end()) it = cache.emplace(e.features_file, read_f32le(e.features_file)).first;
    const auto& data = it->second;
    const std::size_t begin = static_cast<std::size_t>(e.feature_row) * dim;
    if (begin + dim > data.size()) fail(ErrorCode::format, e.features_file + ": feature row out of range");
    for (std::size_t d = 0; d < dim; ++d) row[d] = data[begin + d];
    out.push_back(row, e.class_index);
  }
  return out;
}

}  // namespace aet
