// SPDX-License-Identifier: Apache-2.0
#include "core/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "core/segmentation.hpp"

namespace aet {

using nlohmann::json;

std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::noshm: return "noshm";
    case SplitMode::shm_loco: return "loco";
    case SplitMode::gradual_prior: return "gradual";
  }
  return "?";
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "noshm") return SplitMode::noshm;
  if (name == "loco" || name == "shm_loco") return SplitMode::shm_loco;
  if (name == "gradual" || name == "gradual_prior") return SplitMode::gradual_prior;
  fail(ErrorCode::invalid_argument, "unknown split mode '" + std::string(name) + "' (noshm|loco|gradual)");
}

json split_spec_to_json(const SplitSpec& s) {
  return {{"mode", to_string(s.mode)},
          {"test_campaign", s.test_campaign},
          {"prior_levels", s.prior_levels},
          {"fractions", s.fractions},
          {"loco_train_fraction", s.loco_train_fraction},
          {"sensors", s.sensors},
          {"seed", s.seed},
          {"num_classes", s.num_classes}};
}

SplitSpec split_spec_from_json(const json& j) {
  SplitSpec s;
  try {
    if (j.contains("mode")) s.mode = parse_split_mode(j.at("mode").get<std::string>());
    s.test_campaign = j.value("test_campaign", s.test_campaign);
    s.prior_levels = j.value("prior_levels", s.prior_levels);
    if (j.contains("fractions")) s.fractions = j.at("fractions").get<std::array<double, 3>>();
    s.loco_train_fraction = j.value("loco_train_fraction", s.loco_train_fraction);
    if (j.contains("sensors")) s.sensors = j.at("sensors").get<std::vector<std::string>>();
    s.seed = j.value("seed", s.seed);
    s.num_classes = j.value("num_classes", s.num_classes);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("malformed split spec: ") + e.what());
  }
  return s;
}

namespace {

bool sensor_selected(const SplitSpec& spec, const std::string& sensor) {
  return spec.sensors.empty() || std::find(spec.sensors.begin(), spec.sensors.end(), sensor) != spec.sensors.end();
}

// Splits `total` = round(fraction * sum(counts)) across classes by largest
// remainder, never exceeding caps[c].
std::vector<std::size_t> allocate(const std::vector<std::size_t>& counts, const std::vector<std::size_t>& caps,
                                  double fraction, std::size_t total_items) {
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total_items)));
  std::vector<std::size_t> take(counts.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double quota = fraction * static_cast<double>(counts[c]);
    take[c] = std::min(caps[c], static_cast<std::size_t>(std::floor(quota)));
    assigned += take[c];
    remainders.emplace_back(quota - std::floor(quota), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  // Two passes: first by remainder order, then anywhere capacity remains.
  for (int pass = 0; pass < 2 && assigned < target; ++pass) {
    for (const auto& [rem, c] : remainders) {
      if (assigned >= target) break;
      if (take[c] < caps[c] && (pass == 1 || rem > 0.0)) {
        ++take[c];
        ++assigned;
      }
    }
  }
  return take;
}

// Groups item indices by class (0-based), each group shuffled with its own
// seeded stream.
std::vector<std::vector<std::size_t>> shuffled_by_class(std::span<const SampleKey> keys,
                                                        const std::vector<std::size_t>& items, int num_classes,
                                                        std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(num_classes));
  for (std::size_t i : items) {
    const int c = keys[i].class_index;
    if (c < 1 || c > num_classes) {
      fail(ErrorCode::invalid_argument, "class " + std::to_string(c) + " outside 1.." + std::to_string(num_classes));
    }
    groups[static_cast<std::size_t>(c - 1)].push_back(i);
  }
  for (std::size_t c = 0; c < groups.size(); ++c) {
    std::mt19937_64 rng(mix_seed(seed, 100 + c));
    std::shuffle(groups[c].begin(), groups[c].end(), rng);
  }
  return groups;
}

// Stratified two-way split of `items` with the given first-part fraction.
void split_two_way(std::span<const SampleKey> keys, const std::vector<std::size_t>& items, double first_fraction,
                   int num_classes, std::uint64_t seed, std::vector<std::size_t>& first,
                   std::vector<std::size_t>& second) {
  const auto groups = shuffled_by_class(keys, items, num_classes, seed);
  std::vector<std::size_t> counts;
  for (const auto& g : groups) counts.push_back(g.size());
  const auto take = allocate(counts, counts, first_fraction, items.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    for (std::size_t i = 0; i < groups[c].size(); ++i) (i < take[c] ? first : second).push_back(groups[c][i]);
  }
}

void sort_all(SplitIndices& s) {
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
}

}  // namespace

SplitIndices split_noshm(std::span<const SampleKey> keys, const SplitSpec& spec) {
  const auto& f = spec.fractions;
  if (f[0] < 0 || f[1] < 0 || f[2] < 0 || std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    fail(ErrorCode::invalid_argument, "split fractions must be non-negative and sum to 1");
  }
  std::vector<std::size_t> items;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!sensor_selected(spec, keys[i].sensor_id)) continue;
    if (!spec.test_campaign.empty() && keys[i].campaign_id != spec.test_campaign) continue;
    items.push_back(i);
  }
  if (items.empty()) fail(ErrorCode::invalid_argument, "no items to split");
  const auto groups = shuffled_by_class(keys, items, spec.num_classes, spec.seed);
  std::vector<std::size_t> counts;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (!groups[c].empty() && groups[c].size() < 3) {
      fail(ErrorCode::invalid_argument, "class " + std::to_string(c + 1) + " has fewer than 3 items");
    }
    counts.push_back(groups[c].size());
  }
  const auto train_take = allocate(counts, counts, f[0], items.size());
  std::vector<std::size_t> rest(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) rest[c] = counts[c] - train_take[c];
  const auto val_take = allocate(counts, rest, f[1], items.size());
  SplitIndices out;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    for (std::size_t i = 0; i < groups[c].size(); ++i) {
      if (i < train_take[c]) {
        out.train.push_back(groups[c][i]);
      } else if (i < train_take[c] + val_take[c]) {
        out.val.push_back(groups[c][i]);
      } else {
        out.test.push_back(groups[c][i]);
      }
    }
  }
  sort_all(out);
  return out;
}

SplitIndices split_loco(std::span<const SampleKey> keys, const SplitSpec& spec) {
  if (spec.test_campaign.empty()) fail(ErrorCode::invalid_argument, "leave-one-campaign-out needs a test campaign");
  std::set<std::string> campaigns;
  std::vector<std::size_t> rest;
  SplitIndices out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!sensor_selected(spec, keys[i].sensor_id)) continue;
    campaigns.insert(keys[i].campaign_id);
    (keys[i].campaign_id == spec.test_campaign ? out.test : rest).push_back(i);
  }
  if (!campaigns.count(spec.test_campaign)) {
    fail(ErrorCode::invalid_argument, "unknown test campaign '" + spec.test_campaign + "'");
  }
  if (campaigns.size() < 2) fail(ErrorCode::invalid_argument, "leave-one-campaign-out needs >= 2 campaigns");
  split_two_way(keys, rest, spec.loco_train_fraction, spec.num_classes, spec.seed, out.train, out.val);
  sort_all(out);
  return out;
}

SplitIndices split_gradual_prior(std::span<const SampleKey> keys, const SplitSpec& spec) {
  if (spec.prior_levels < 0 || spec.prior_levels > spec.num_classes - 1) {
    fail(ErrorCode::invalid_argument, "prior_levels must lie in 0.." + std::to_string(spec.num_classes - 1));
  }
  SplitIndices out = split_loco(keys, spec);
  if (spec.prior_levels == 0) return out;
  std::vector<std::size_t> moved, kept;
  for (std::size_t i : out.test) (keys[i].class_index <= spec.prior_levels ? moved : kept).push_back(i);
  out.test = std::move(kept);
  split_two_way(keys, moved, spec.loco_train_fraction, spec.num_classes, mix_seed(spec.seed, 7), out.train, out.val);
  sort_all(out);
  return out;
}

SplitIndices make_split(std::span<const SampleKey> keys, const SplitSpec& spec) {
  switch (spec.mode) {
    case SplitMode::noshm: return split_noshm(keys, spec);
    case SplitMode::shm_loco: return split_loco(keys, spec);
    case SplitMode::gradual_prior: return split_gradual_prior(keys, spec);
  }
  fail(ErrorCode::internal, "unhandled split mode");
}

// --- pipeline --------------------------------------------------------------------

std::vector<StreamPair> generate_campaigns(const SyntheticSpec& base, const std::vector<std::string>& campaigns,
                                           const std::vector<std::string>& sensors) {
  if (campaigns.empty() || sensors.empty()) fail(ErrorCode::invalid_argument, "need at least one campaign and sensor");
  std::vector<StreamPair> pairs;
  for (const auto& campaign : campaigns) {
    for (const auto& sensor : sensors) {
      SyntheticSpec spec = base;
      spec.campaign_id = campaign;
      spec.sensor_id = sensor;
      spec.seed = mix_seed(base.seed, hash_name(campaign));
      auto streams = generate_synthetic(spec);
      pairs.push_back({std::move(streams.ae), std::move(streams.vibrometer)});
    }
  }
  return pairs;
}

json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"denoise_level", c.denoise.level},
          {"block_seconds", c.denoise.block_seconds},
          {"hanning", c.hanning},
          {"voices_per_octave", c.voices_per_octave},
          {"octaves", c.octaves},
          {"literal_12_filters", c.literal_12_filters}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  try {
    c.denoise.level = j.value("denoise_level", c.denoise.level);
    c.denoise.block_seconds = j.value("block_seconds", c.denoise.block_seconds);
    c.hanning = j.value("hanning", c.hanning);
    c.voices_per_octave = j.value("voices_per_octave", c.voices_per_octave);
    c.octaves = j.value("octaves", c.octaves);
    c.literal_12_filters = j.value("literal_12_filters", c.literal_12_filters);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("malformed pipeline config: ") + e.what());
  }
  return c;
}

std::size_t fft_length_for(std::size_t n) {
  std::size_t len = 2;
  while (len < n) len *= 2;
  return len;
}

MorseFilterBank filter_bank_for(const PipelineConfig& cfg, double sample_rate_hz, std::size_t max_segment_length) {
  FilterBankConfig fb;
  fb.sample_rate_hz = sample_rate_hz;
  fb.n_fft = fft_length_for(max_segment_length);
  fb.voices_per_octave = cfg.voices_per_octave;
  fb.octaves = cfg.octaves;
  fb.total_filters = cfg.literal_12_filters ? 12 : 0;
  return MorseFilterBank::build(fb);
}

LabeledFeatures FeatureDataset::subset(std::span<const std::size_t> idx) const {
  LabeledFeatures out;
  out.dim = features.dim;
  out.values.reserve(idx.size() * features.dim);
  for (std::size_t i : idx) out.push_back(features.row(i), features.labels[i]);
  return out;
}

FeatureDataset build_feature_dataset(const std::vector<StreamPair>& pairs, const PipelineConfig& cfg) {
  if (pairs.empty()) fail(ErrorCode::invalid_argument, "no streams to process");
  const double fs = pairs.front().ae.manifest.sample_rate_hz;
  std::vector<CycleSegment> segments;
  for (const auto& pair : pairs) {
    if (pair.ae.manifest.sample_rate_hz != fs) fail(ErrorCode::invalid_argument, "streams differ in sample rate");
    auto ae = cfg.denoise.level > 0 ? denoise_stream(pair.ae, cfg.denoise, cfg.jobs) : pair.ae;
    auto segs = segment_cycles(ae, pair.vibrometer);
    segments.insert(segments.end(), std::make_move_iterator(segs.begin()), std::make_move_iterator(segs.end()));
  }
  FeatureDataset out;
  if (segments.empty()) return out;
  std::size_t max_len = 0;
  for (const auto& s : segments) max_len = std::max(max_len, s.samples.size());
  const auto bank = filter_bank_for(cfg, fs, max_len);

  std::vector<std::vector<double>> rows(segments.size());
  parallel_for(segments.size(), cfg.jobs, [&](std::size_t i) {
    auto& samples = segments[i].samples;
    if (cfg.hanning) apply_hanning_inplace(samples);
    rows[i] = featurize(cwt(samples, bank));
  });
  out.features.dim = kFeatureDim;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out.keys.push_back({segments[i].class_index, segments[i].campaign_id, segments[i].sensor_id});
    out.cycle_indices.push_back(segments[i].cycle_index);
    out.features.push_back(rows[i], segments[i].class_index);
  }
  return out;
}

// --- experiments -------------------------------------------------------------

std::string config_fingerprint(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_name(config.dump())));
  return buf;
}

std::vector<ExperimentResult> run_experiment(const FeatureDataset& data, const SplitSpec& split,
                                             const TrainConfig& train_cfg, int repeats, std::size_t jobs,
                                             const std::string& key) {
  if (repeats < 1) fail(ErrorCode::invalid_argument, "repeats must be >= 1");
  const std::string fingerprint =
      config_fingerprint({{"split", split_spec_to_json(split)}, {"train", train_config_to_json(train_cfg)}});
  std::vector<ExperimentResult> results(static_cast<std::size_t>(repeats));
  parallel_for(results.size(), jobs, [&](std::size_t r) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = mix_seed(split.seed ^ train_cfg.seed, r);
    SplitSpec s = split;
    s.seed = seed;
    TrainConfig t = train_cfg;
    t.seed = seed;
    const auto idx = make_split(data.keys, s);
    const auto trained = train(data.subset(idx.train), data.subset(idx.val), t);
    const auto cm = evaluate(trained.model, data.subset(idx.test));
    ExperimentResult& res = results[r];
    res.key = key;
    res.repeat = static_cast<int>(r);
    res.seed = seed;
    res.n_train = idx.train.size();
    res.n_val = idx.val.size();
    res.n_test = idx.test.size();
    res.metrics = summarize(cm);
    res.adjacent_error_fraction = adjacent_error_fraction(cm);
    res.confusion = cm;
    res.fingerprint = fingerprint;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return results;
}

namespace {

std::array<double, 5> as_array(const MetricSummary& m) {
  return {m.acc, m.acc_pm1, m.mean_recall_pm1, m.mean_precision_pm1, m.f1_pm1};
}

MetricSummary from_array(const std::array<double, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

}  // namespace

ExperimentSummary summarize_results(const std::vector<ExperimentResult>& results) {
  ExperimentSummary s;
  if (results.empty()) return s;
  s.key = results.front().key;
  s.repeats = results.size();
  std::array<double, 5> mean{}, var{};
  for (const auto& r : results) {
    const auto a = as_array(r.metrics);
    for (std::size_t i = 0; i < 5; ++i) mean[i] += a[i];
  }
  for (auto& m : mean) m /= static_cast<double>(results.size());
  for (const auto& r : results) {
    const auto a = as_array(r.metrics);
    for (std::size_t i = 0; i < 5; ++i) var[i] += (a[i] - mean[i]) * (a[i] - mean[i]);
  }
  for (auto& v : var) v = results.size() > 1 ? std::sqrt(v / static_cast<double>(results.size() - 1)) : 0.0;
  s.mean = from_array(mean);
  s.stddev = from_array(var);
  return s;
}

std::string results_to_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out.precision(10);
  out << "key,repeat,seed,n_train,n_val,n_test,acc,acc_pm1,mean_recall_pm1,mean_precision_pm1,f1_pm1,"
         "adjacent_error_fraction,acc_std,acc_pm1_std,mean_recall_pm1_std,mean_precision_pm1_std,f1_pm1_std,"
         "fingerprint\n";
  auto emit_metrics = [&out](const MetricSummary& m) {
    out << m.acc << ',' << m.acc_pm1 << ',' << m.mean_recall_pm1 << ',' << m.mean_precision_pm1 << ',' << m.f1_pm1;
  };
  std::vector<std::string> keys;
  for (const auto& r : results) {
    if (std::find(keys.begin(), keys.end(), r.key) == keys.end()) keys.push_back(r.key);
  }
  for (const auto& key : keys) {
    std::vector<ExperimentResult> group;
    for (const auto& r : results) {
      if (r.key != key) continue;
      group.push_back(r);
      out << r.key << ',' << r.repeat << ',' << r.seed << ',' << r.n_train << ',' << r.n_val << ',' << r.n_test << ',';
      emit_metrics(r.metrics);
      out << ',';
      if (!std::isnan(r.adjacent_error_fraction)) out << r.adjacent_error_fraction;
      out << ",,,,,," << r.fingerprint << '\n';
    }
    const auto s = summarize_results(group);
    out << key << ",summary,,,,,";
    emit_metrics(s.mean);
    out << ",,";
    emit_metrics(s.stddev);
    out << ',' << group.front().fingerprint << '\n';
  }
  return out.str();
}

json results_to_json(const std::vector<ExperimentResult>& results) {
  json rows = json::array();
  for (const auto& r : results) {
    rows.push_back({{"key", r.key},
                    {"repeat", r.repeat},
                    {"seed", r.seed},
                    {"n_train", r.n_train},
                    {"n_val", r.n_val},
                    {"n_test", r.n_test},
                    {"acc", r.metrics.acc},
                    {"acc_pm1", r.metrics.acc_pm1},
                    {"mean_recall_pm1", r.metrics.mean_recall_pm1},
                    {"mean_precision_pm1", r.metrics.mean_precision_pm1},
                    {"f1_pm1", r.metrics.f1_pm1},
                    {"adjacent_error_fraction",
                     std::isnan(r.adjacent_error_fraction) ? json(nullptr) : json(r.adjacent_error_fraction)},
                    {"confusion", confusion_to_json(r.confusion)},
                    {"fingerprint", r.fingerprint}});
  }
  return rows;
}

}  // namespace aet
