// SPDX-License-Identifier: Apache-2.0
#include "core/stages.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/common.hpp"
#include "core/cwt.hpp"
#include "core/dataset.hpp"
#include "core/experiments.hpp"
#include "core/image_io.hpp"
#include "core/plot.hpp"
#include "core/segmentation.hpp"

namespace aet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- config access -------------------------------------------------------------

bool has(const json& cfg, const char* key) { return cfg.contains(key) && !cfg.at(key).is_null(); }

std::string get_string(const json& cfg, const char* key, const std::string& fallback = "") {
  if (!has(cfg, key)) return fallback;
  const auto& v = cfg.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string require_string(const json& cfg, const char* key) {
  if (!has(cfg, key)) fail(ErrorCode::invalid_argument, std::string("missing required option '") + key + "'");
  return get_string(cfg, key);
}

std::vector<std::string> get_list(const json& cfg, const char* key, std::vector<std::string> fallback = {}) {
  if (!has(cfg, key)) return fallback;
  const auto& v = cfg.at(key);
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const auto& item : v) out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
    return out;
  }
  std::stringstream ss(v.is_string() ? v.get<std::string>() : v.dump());
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T get_num(const json& cfg, const char* key, T fallback) {
  if (!has(cfg, key)) return fallback;
  const auto& v = cfg.at(key);
  if (!v.is_number() && !v.is_boolean()) {
    fail(ErrorCode::invalid_argument, std::string("option '") + key + "' must be a number, got " + v.dump());
  }
  return v.get<T>();
}

std::vector<int> get_int_list(const json& cfg, const char* key, std::vector<int> fallback) {
  if (!has(cfg, key)) return fallback;
  std::vector<int> out;
  for (const auto& s : get_list(cfg, key)) {
    try {
      out.push_back(std::stoi(s));
    } catch (const std::exception&) {
      fail(ErrorCode::invalid_argument, std::string("option '") + key + "' expects integers, got '" + s + "'");
    }
  }
  return out;
}

std::uint64_t seed_of(const json& cfg) { return get_num<std::uint64_t>(cfg, "seed", 0); }
std::size_t jobs_of(const json& cfg) { return get_num<std::size_t>(cfg, "jobs", 0); }

// Synthetic spec keys live at the top level of the stage config.
SyntheticSpec synthetic_spec_of(const json& cfg) {
  json j = json::object();
  for (const char* key : {"sample_rate_hz", "excitation_hz", "seconds_per_level", "n_levels", "snr_db",
                          "bursts_per_cycle", "class_burst_freqs_hz", "burst_decay_cycles", "detune_fraction",
                          "gain_jitter"}) {
    if (has(cfg, key)) j[key] = cfg.at(key);
  }
  j["seed"] = seed_of(cfg);
  auto spec = synthetic_spec_from_json(j);
  validate_synthetic_spec(spec);
  return spec;
}

TrainConfig train_config_of(const json& cfg) {
  json j = json::object();
  for (const char* key : {"epochs", "batch_size", "optimizer", "schedule", "lr_max", "loss", "momentum",
                          "weight_decay", "beta2", "epsilon", "div_factor", "warmup_fraction", "final_div_factor",
                          "piecewise_drop", "piecewise_period_epochs", "val_every", "init_scale", "num_classes"}) {
    if (has(cfg, key)) j[key] = cfg.at(key);
  }
  j["seed"] = seed_of(cfg);
  return train_config_from_json(j);
}

PipelineConfig pipeline_config_of(const json& cfg) {
  PipelineConfig p;
  p.denoise.level = get_num<int>(cfg, "denoise_level", 0);
  p.denoise.block_seconds = get_num<double>(cfg, "block_seconds", p.denoise.block_seconds);
  p.hanning = get_num<bool>(cfg, "hanning", true);
  p.voices_per_octave = get_num<double>(cfg, "voices", p.voices_per_octave);
  p.octaves = get_num<int>(cfg, "octaves", p.octaves);
  p.literal_12_filters = get_num<bool>(cfg, "literal_12_filters", false);
  p.jobs = jobs_of(cfg);
  return p;
}

SplitSpec split_spec_of(const json& cfg, const std::string& default_test) {
  SplitSpec s;
  s.mode = parse_split_mode(get_string(cfg, "mode", "loco"));
  s.test_campaign = get_string(cfg, "test_campaign", default_test);
  s.prior_levels = get_num<int>(cfg, "prior_levels", 0);
  if (has(cfg, "fractions")) {
    const auto f = get_list(cfg, "fractions");
    if (f.size() != 3) fail(ErrorCode::invalid_argument, "fractions needs three values train,val,test");
    for (std::size_t i = 0; i < 3; ++i) s.fractions[i] = std::stod(f[i]);
  }
  s.loco_train_fraction = get_num<double>(cfg, "loco_train_fraction", s.loco_train_fraction);
  s.sensors = get_list(cfg, "sensors");
  s.seed = seed_of(cfg);
  s.num_classes = get_num<int>(cfg, "num_classes", kDefaultNumClasses);
  return s;
}

// --- filesystem ------------------------------------------------------------------

fs::path make_out_dir(const json& cfg) {
  const fs::path out = require_string(cfg, "out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + out.string() + ": " + ec.message());
  return out;
}

void write_run_json(const fs::path& dir, const std::string& stage, const json& cfg) {
  json run = {{"tool", "aetorque"},
              {"version", AET_VERSION},
              {"stage", stage},
              {"config", cfg},
              {"seed", seed_of(cfg)}};
  write_text_file((dir / "run.json").string(), run.dump(2) + "\n");
}

// A manifest path given directly, or `<dir>/<default_name>`.
std::string manifest_in(const std::string& path, const char* default_name) {
  return fs::is_directory(path) ? (fs::path(path) / default_name).string() : path;
}

std::vector<fs::path> sorted_entries(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) fail(ErrorCode::io, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_vibrometer(const StreamManifest& m) { return m.sensor_id == "vibrometer"; }

// Pairs every AE stream in `dir` with the vibrometer of its campaign.
std::vector<StreamPair> read_stream_dir(const fs::path& dir) {
  std::map<std::string, AEStream> vibros;
  std::vector<AEStream> aes;
  for (const auto& p : sorted_entries(dir, ".json")) {
    if (p.filename() == "run.json") continue;
    auto s = read_stream(p.string());
    if (is_vibrometer(s.manifest)) {
      vibros[s.manifest.campaign_id] = std::move(s);
    } else {
      aes.push_back(std::move(s));
    }
  }
  std::vector<StreamPair> pairs;
  for (auto& ae : aes) {
    const auto it = vibros.find(ae.manifest.campaign_id);
    if (it == vibros.end()) fail(ErrorCode::validation, "no vibrometer stream for campaign " + ae.manifest.campaign_id);
    pairs.push_back({std::move(ae), it->second});
  }
  if (pairs.empty()) fail(ErrorCode::invalid_argument, "no AE streams in " + dir.string());
  return pairs;
}

std::string stream_name(const StreamManifest& m) { return m.campaign_id + "_" + m.sensor_id; }

// --- stages ------------------------------------------------------------------------

json stage_synth(const json& cfg) {
  const auto out = make_out_dir(cfg);
  const auto spec = synthetic_spec_of(cfg);
  const auto campaigns = get_list(cfg, "campaigns", {"B", "C", "D", "E", "F"});
  const auto sensors = get_list(cfg, "sensors", {"synthetic"});
  const auto pairs = generate_campaigns(spec, campaigns, sensors);
  json written = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i % sensors.size() == 0) {
      const auto path = out / stream_name(pairs[i].vibrometer.manifest);
      write_stream(pairs[i].vibrometer, path.string());
      written.push_back(path.string() + ".json");
    }
    const auto path = out / stream_name(pairs[i].ae.manifest);
    write_stream(pairs[i].ae, path.string());
    written.push_back(path.string() + ".json");
  }
  write_run_json(out, "synth", cfg);
  return {{"streams", written}, {"synthetic_spec", synthetic_spec_to_json(spec)}};
}

json stage_denoise(const json& cfg) {
  const std::string in = require_string(cfg, "in");
  const auto out = make_out_dir(cfg);
  DenoiseConfig dc;
  dc.level = get_num<int>(cfg, "level", 4);
  dc.block_seconds = get_num<double>(cfg, "block_seconds", dc.block_seconds);
  std::vector<fs::path> inputs;
  if (fs::is_directory(in)) {
    for (const auto& p : sorted_entries(in, ".json")) {
      if (p.filename() != "run.json") inputs.push_back(p);
    }
  } else {
    inputs.push_back(stream_base_path(in) + ".json");
  }
  json written = json::array();
  for (const auto& p : inputs) {
    const auto s = read_stream(p.string());
    const auto result = is_vibrometer(s.manifest) ? s : denoise_stream(s, dc, jobs_of(cfg));
    const auto path = out / fs::path(stream_base_path(p.string())).filename();
    write_stream(result, path.string());
    written.push_back(path.string() + ".json");
  }
  write_run_json(out, "denoise", cfg);
  return {{"streams", written}, {"denoise", denoise_config_to_json(dc)}};
}

json stage_segment(const json& cfg) {
  const auto out = make_out_dir(cfg);
  std::vector<StreamPair> pairs;
  if (has(cfg, "ae") || has(cfg, "vibro")) {
    pairs.push_back({read_stream(require_string(cfg, "ae")), read_stream(require_string(cfg, "vibro"))});
  } else {
    pairs = read_stream_dir(require_string(cfg, "in"));
  }
  const bool hanning = get_num<bool>(cfg, "hanning", true);
  std::vector<CycleSegment> all;
  for (const auto& pair : pairs) {
    auto segs = segment_cycles(pair.ae, pair.vibrometer);
    for (auto& s : segs) {
      if (hanning) apply_hanning_inplace(s.samples);
      all.push_back(std::move(s));
    }
  }
  const double fs_hz = pairs.front().ae.manifest.sample_rate_hz;
  for (const auto& p : pairs) {
    if (p.ae.manifest.sample_rate_hz != fs_hz) fail(ErrorCode::validation, "streams differ in sample rate");
  }
  write_segment_store(out.string(), all, fs_hz, hanning);
  std::map<int, std::int64_t> per_class;
  for (const auto& s : all) ++per_class[s.class_index];
  json counts = json::object();
  for (const auto& [c, n] : per_class) counts[std::to_string(c)] = n;
  write_run_json(out, "segment", cfg);
  return {{"segments", all.size()}, {"per_class", counts}};
}

json stage_scalogram(const json& cfg) {
  const auto store = read_segment_store(require_string(cfg, "in"));
  const auto out = make_out_dir(cfg);
  if (store.records.empty()) fail(ErrorCode::validation, "segment store is empty");
  const auto pc = pipeline_config_of(cfg);
  const bool png = get_num<bool>(cfg, "png", true);
  ImageOptions io;
  if (get_string(cfg, "scaling", "per_image") == "fixed") {
    io.scaling = ImageScaling::fixed_range;
    io.range_min = get_num<double>(cfg, "range_min", 0.0);
    io.range_max = get_num<double>(cfg, "range_max", 1.0);
  }
  const double fs_hz = store.records.front().sample_rate_hz;
  std::size_t max_len = 0;
  for (const auto& r : store.records) {
    if (r.sample_rate_hz != fs_hz) fail(ErrorCode::validation, "segments differ in sample rate");
    max_len = std::max(max_len, static_cast<std::size_t>(r.length));
  }
  const auto bank = filter_bank_for(pc, fs_hz, max_len);
  if (png) fs::create_directories(out / "png");

  const std::size_t n = store.records.size();
  std::vector<double> features(n * kFeatureDim);
  std::vector<DatasetEntry> entries(n);
  parallel_for(n, pc.jobs, [&](std::size_t i) {
    const auto& r = store.records[i];
    const auto samples = store.segment_samples(i);
    const auto sg = cwt(samples, bank);
    const auto f = featurize(sg);
    std::copy(f.begin(), f.end(), features.begin() + static_cast<std::ptrdiff_t>(i * kFeatureDim));
    auto& e = entries[i];
    e.class_index = r.class_index;
    e.campaign_id = r.campaign_id;
    e.sensor_id = r.sensor_id;
    e.cycle_index = r.cycle_index;
    e.features_file = (out / "features.f32le").string();
    e.feature_row = static_cast<std::int64_t>(i);
    if (png) {
      const auto img = to_image(sg, io);
      e.path = (out / "png" / (r.campaign_id + "_" + r.sensor_id + "_" + std::to_string(r.cycle_index) + ".png"))
                   .string();
      write_png_rgb(e.path, img.width, img.height, img.pixels);
    }
  });
  write_feature_file((out / "features.f32le").string(), features, kFeatureDim);
  write_dataset_manifest((out / "dataset.jsonl").string(), entries);
  json bank_info = {{"n_fft", bank.n_fft()},
                    {"n_scales", bank.n_scales()},
                    {"f_max_hz", bank.f_max_hz()},
                    {"f_min_hz", bank.f_min_hz()},
                    {"gamma", bank.gamma()},
                    {"beta", bank.beta()}};
  write_text_file((out / "filter_bank.json").string(), bank_info.dump(2) + "\n");
  write_run_json(out, "scalogram", cfg);
  return {{"entries", n}, {"filter_bank", bank_info}, {"manifest", (out / "dataset.jsonl").string()}};
}

json stage_dataset(const json& cfg) {
  const auto entries = read_dataset_manifest(manifest_in(require_string(cfg, "in"), "dataset.jsonl"));
  const auto out = make_out_dir(cfg);
  if (entries.empty()) fail(ErrorCode::validation, "dataset manifest is empty");
  std::vector<SampleKey> keys;
  for (const auto& e : entries) keys.push_back({e.class_index, e.campaign_id, e.sensor_id});
  const auto spec = split_spec_of(cfg, entries.front().campaign_id);
  const auto idx = make_split(keys, spec);
  auto pick = [&](const std::vector<std::size_t>& ids) {
    std::vector<DatasetEntry> sel;
    for (std::size_t i : ids) sel.push_back(entries[i]);
    return sel;
  };
  write_dataset_manifest((out / "train.jsonl").string(), pick(idx.train));
  write_dataset_manifest((out / "val.jsonl").string(), pick(idx.val));
  write_dataset_manifest((out / "test.jsonl").string(), pick(idx.test));
  const json counts = {{"train", idx.train.size()}, {"val", idx.val.size()}, {"test", idx.test.size()}};
  write_text_file((out / "split.json").string(),
                  json({{"split", split_spec_to_json(spec)}, {"counts", counts}}).dump(2) + "\n");
  write_run_json(out, "dataset", cfg);
  return {{"counts", counts}};
}

json stage_train(const json& cfg) {
  const std::string in = get_string(cfg, "in");
  const std::string train_path = get_string(cfg, "train", in.empty() ? "" : manifest_in(in, "train.jsonl"));
  const std::string val_path = get_string(cfg, "val", in.empty() ? "" : manifest_in(in, "val.jsonl"));
  if (train_path.empty()) fail(ErrorCode::invalid_argument, "missing required option 'in' (or 'train')");
  const auto out = make_out_dir(cfg);
  const auto tc = train_config_of(cfg);
  const auto train_set = load_features(read_dataset_manifest(train_path));
  const auto val_set = val_path.empty() || !fs::exists(val_path) ? LabeledFeatures{}
                                                                  : load_features(read_dataset_manifest(val_path));
  auto result = train(train_set, val_set, tc);
  result.model.fingerprint["version"] = AET_VERSION;
  result.model.fingerprint["train_manifest"] = fs::path(train_path).filename().string();
  save_model(result.model, (out / "model.bin").string());
  write_text_file((out / "train_log.csv").string(), train_log_to_csv(result.log));
  write_run_json(out, "train", cfg);
  json last = json::object();
  if (!result.log.empty()) {
    const auto& row = result.log.back();
    last = {{"iteration", row.iteration}, {"lr", row.lr}, {"train_loss", row.train_loss}};
    if (row.val_acc) last["val_acc"] = *row.val_acc;
    if (row.val_acc_pm1) last["val_acc_pm1"] = *row.val_acc_pm1;
  }
  return {{"n_train", train_set.size()}, {"n_val", val_set.size()}, {"last", last}};
}

json stage_eval(const json& cfg) {
  const auto model = load_model(require_string(cfg, "model"));
  const auto entries = read_dataset_manifest(manifest_in(require_string(cfg, "test"), "test.jsonl"));
  const auto out = make_out_dir(cfg);
  const auto cm = evaluate(model, load_features(entries, model.feature_dim));
  const auto metrics = metrics_to_json(cm);
  write_text_file((out / "metrics.json").string(), metrics.dump(2) + "\n");
  write_text_file((out / "confusion.csv").string(), confusion_to_csv(cm));
  write_run_json(out, "eval", cfg);
  return metrics;
}

json stage_predict(const json& cfg) {
  const auto model = load_model(require_string(cfg, "model"));
  const auto entries = read_dataset_manifest(manifest_in(require_string(cfg, "test"), "test.jsonl"));
  const auto out = make_out_dir(cfg);
  const auto data = load_features(entries, model.feature_dim);
  std::ostringstream csv;
  csv.precision(17);
  csv << "path,campaign,sensor,cycle_index,class,predicted";
  for (int k = 1; k <= model.num_classes; ++k) csv << ",p" << k;
  csv << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = predict(model, data.row(i));
    csv << fs::path(entries[i].path).filename().string() << ',' << entries[i].campaign_id << ','
        << entries[i].sensor_id << ',' << entries[i].cycle_index << ',' << entries[i].class_index << ','
        << argmax_class(p);
    for (double v : p) csv << ',' << v;
    csv << '\n';
  }
  write_text_file((out / "predictions.csv").string(), csv.str());
  write_run_json(out, "predict", cfg);
  return {{"predictions", data.size()}};
}

json stage_sweep(const json& cfg) {
  const auto out = make_out_dir(cfg);
  const std::string kind = get_string(cfg, "kind", "denoise");
  const auto campaigns = get_list(cfg, "campaigns", {"B", "C", "D", "E", "F"});
  const auto sensors = get_list(cfg, "sensors", {"synthetic"});
  const int repeats = get_num<int>(cfg, "repeats", 5);
  const std::size_t jobs = jobs_of(cfg);
  auto base_pipeline = pipeline_config_of(cfg);
  const auto tc = train_config_of(cfg);

  std::vector<StreamPair> pairs;
  if (has(cfg, "in")) {
    pairs = read_stream_dir(require_string(cfg, "in"));
  } else {
    pairs = generate_campaigns(synthetic_spec_of(cfg), campaigns, sensors);
  }
  SplitSpec split = split_spec_of(cfg, pairs.front().ae.manifest.campaign_id);
  split.sensors.clear();

  std::vector<ExperimentResult> results;
  std::string parameter;
  auto run = [&](const FeatureDataset& data, const SplitSpec& s, const TrainConfig& t, const std::string& key) {
    auto r = run_experiment(data, s, t, repeats, jobs, key);
    results.insert(results.end(), r.begin(), r.end());
  };

  if (kind == "denoise") {
    parameter = "denoise_level";
    for (int level : get_int_list(cfg, "levels", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9})) {
      auto pc = base_pipeline;
      pc.denoise.level = level;
      run(build_feature_dataset(pairs, pc), split, tc, "denoise_level=" + std::to_string(level));
    }
  } else {
    const auto data = build_feature_dataset(pairs, base_pipeline);
    if (kind == "prior") {
      parameter = "prior_levels";
      split.mode = SplitMode::gradual_prior;
      std::vector<int> levels;
      for (int p = 0; p < split.num_classes; ++p) levels.push_back(p);
      for (int p : get_int_list(cfg, "priors", levels)) {
        auto s = split;
        s.prior_levels = p;
        run(data, s, tc, "prior_levels=" + std::to_string(p));
      }
    } else if (kind == "sensors") {
      parameter = "sensor";
      std::vector<std::string> present;
      for (const auto& k : data.keys) {
        if (std::find(present.begin(), present.end(), k.sensor_id) == present.end()) present.push_back(k.sensor_id);
      }
      for (const auto& sensor : present) {
        auto s = split;
        s.sensors = {sensor};
        run(data, s, tc, "sensor=" + sensor);
      }
      if (present.size() > 1) run(data, split, tc, "sensor=fusion");
    } else if (kind == "loss") {
      parameter = "loss";
      for (LossKind loss : kAllLossKinds) {
        auto t = tc;
        t.loss = loss;
        run(data, split, t, "loss=" + std::string(to_string(loss)));
      }
    } else if (kind == "schedule") {
      parameter = "schedule";
      for (ScheduleKind sk : {ScheduleKind::onecycle, ScheduleKind::constant, ScheduleKind::piecewise}) {
        auto t = tc;
        t.schedule = sk;
        run(data, split, t, "schedule=" + std::string(to_string(sk)));
      }
    } else {
      fail(ErrorCode::invalid_argument, "unknown sweep kind '" + kind + "' (denoise|prior|sensors|loss|schedule)");
    }
  }

  write_text_file((out / "results.csv").string(), results_to_csv(results));
  write_text_file((out / "results.json").string(), results_to_json(results).dump(2) + "\n");
  write_text_file((out / "sweep.json").string(),
                  json({{"kind", kind}, {"parameter", parameter}, {"repeats", repeats}}).dump(2) + "\n");
  std::ostringstream timings;
  timings << "key,repeat,wall_seconds\n";
  for (const auto& r : results) timings << r.key << ',' << r.repeat << ',' << r.wall_seconds << '\n';
  write_text_file((out / "timings.csv").string(), timings.str());
  write_run_json(out, "sweep", cfg);
  return {{"kind", kind}, {"rows", results.size()}};
}

// --- report ------------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_double(const std::string& s) {
  if (s.empty()) return std::nan("");
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    return std::nan("");
  }
}

std::string plot_prefix(const fs::path& root, const fs::path& file) {
  auto rel = fs::relative(file.parent_path(), root).generic_string();
  if (rel == "." || rel.empty()) return "";
  std::replace(rel.begin(), rel.end(), '/', '_');
  return rel + "_";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << v;
  return s.str();
}

constexpr std::array<std::uint8_t, 3> kBlue{31, 119, 180};
constexpr std::array<std::uint8_t, 3> kOrange{255, 127, 14};

json stage_report(const json& cfg) {
  const fs::path in = require_string(cfg, "in");
  json out_cfg = cfg;
  if (!has(cfg, "out")) out_cfg["out"] = in.string();
  const auto out = make_out_dir(out_cfg);
  if (!fs::is_directory(in)) fail(ErrorCode::io, "not a directory: " + in.string());

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(in)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::ostringstream md;
  md << "# Summary\n\n";
  json plots = json::array();

  md << "## Evaluations\n\n| run | n | acc | acc_pm1 | mean R_pm1 | mean P_pm1 | F1_pm1 |\n|---|---|---|---|---|---|---|\n";
  for (const auto& f : files) {
    if (f.filename() != "metrics.json") continue;
    const auto m = json::parse(read_text_file(f.string()));
    auto num = [&](const char* k) { return m.contains(k) && m[k].is_number() ? m[k].get<double>() : std::nan(""); };
    md << "| " << fs::relative(f.parent_path(), in).generic_string() << " | " << m.value("n", 0) << " | "
       << fmt(num("acc")) << " | " << fmt(num("acc_pm1")) << " | " << fmt(num("mean_recall_pm1")) << " | "
       << fmt(num("mean_precision_pm1")) << " | " << fmt(num("f1_pm1")) << " |\n";
  }
  md << "\n";

  for (const auto& f : files) {
    if (f.filename() != "train_log.csv") continue;
    const auto rows = read_csv(f);
    PlotSeries acc{"val_acc", {}, {}, kBlue}, pm1{"val_acc_pm1", {}, {}, kOrange};
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 6 || rows[i][4].empty()) continue;
      acc.x.push_back(to_double(rows[i][0]));
      acc.y.push_back(to_double(rows[i][4]));
      pm1.x.push_back(to_double(rows[i][0]));
      pm1.y.push_back(to_double(rows[i][5]));
    }
    const auto name = plot_prefix(in, f) + "accuracy_vs_iteration.png";
    write_line_plot_png((out / name).string(), {acc, pm1});
    plots.push_back(name);
    md << "## Training " << fs::relative(f.parent_path(), in).generic_string() << "\n\n![](" << name
       << ")\n\nBlue: validation acc, orange: validation acc_pm1.";
    if (!acc.y.empty()) md << " Final: acc " << fmt(acc.y.back()) << ", acc_pm1 " << fmt(pm1.y.back()) << ".";
    md << "\n\n";
  }

  for (const auto& f : files) {
    if (f.filename() != "results.csv") continue;
    std::string parameter = "key";
    const auto sweep_file = f.parent_path() / "sweep.json";
    if (fs::exists(sweep_file)) parameter = json::parse(read_text_file(sweep_file.string())).value("parameter", parameter);
    const auto rows = read_csv(f);
    md << "## Sweep " << fs::relative(f.parent_path(), in).generic_string() << " (" << parameter << ")\n\n"
       << "| " << parameter << " | acc | acc_std | acc_pm1 | acc_pm1_std | F1_pm1 |\n|---|---|---|---|---|---|\n";
    PlotSeries acc{"acc", {}, {}, kBlue}, pm1{"acc_pm1", {}, {}, kOrange};
    bool numeric = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 18 || r[1] != "summary") continue;
      const auto eq = r[0].find('=');
      const std::string value = eq == std::string::npos ? r[0] : r[0].substr(eq + 1);
      md << "| " << value << " | " << fmt(to_double(r[6])) << " | " << fmt(to_double(r[12])) << " | "
         << fmt(to_double(r[7])) << " | " << fmt(to_double(r[13])) << " | " << fmt(to_double(r[10])) << " |\n";
      const double x = to_double(value);
      if (std::isnan(x)) numeric = false;
      acc.x.push_back(x);
      acc.y.push_back(to_double(r[6]));
      pm1.x.push_back(x);
      pm1.y.push_back(to_double(r[7]));
    }
    md << "\n";
    if (numeric && !acc.x.empty()) {
      const auto name = plot_prefix(in, f) + "accuracy_vs_" + parameter + ".png";
      write_line_plot_png((out / name).string(), {acc, pm1});
      plots.push_back(name);
      md << "![](" << name << ")\n\nBlue: acc, orange: acc_pm1 (means over repeats).\n\n";
    }
  }

  write_text_file((out / "summary.md").string(), md.str());
  write_run_json(out, "report", out_cfg);
  return {{"summary", (out / "summary.md").string()}, {"plots", plots}};
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"synth", "segment", "denoise", "scalogram", "dataset",
                                                 "train", "eval",    "predict", "sweep",     "report"};
  return names;
}

json run_stage(const std::string& stage, const json& config) {
  if (!config.is_object()) fail(ErrorCode::invalid_argument, "stage config must be a JSON object");
  json result;
  if (stage == "synth") {
    result = stage_synth(config);
  } else if (stage == "segment") {
    result = stage_segment(config);
  } else if (stage == "denoise") {
    result = stage_denoise(config);
  } else if (stage == "scalogram") {
    result = stage_scalogram(config);
  } else if (stage == "dataset") {
    result = stage_dataset(config);
  } else if (stage == "train") {
    result = stage_train(config);
  } else if (stage == "eval") {
    result = stage_eval(config);
  } else if (stage == "predict") {
    result = stage_predict(config);
  } else if (stage == "sweep") {
    result = stage_sweep(config);
  } else if (stage == "report") {
    result = stage_report(config);
  } else {
    fail(ErrorCode::invalid_argument, "unknown stage '" + stage + "'");
  }
  result["stage"] = stage;
  return result;
}

}  // namespace aet
