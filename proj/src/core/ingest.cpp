// SPDX-License-Identifier: Apache-2.0
#include "core/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace aet {

namespace fs = std::filesystem;
using nlohmann::json;

int StreamManifest::interval_index_at(std::int64_t sample) const {
  for (std::size_t i = 0; i < torque_schedule.size(); ++i) {
    if (torque_schedule[i].contains(sample)) return static_cast<int>(i);
  }
  return -1;
}

int StreamManifest::class_at(std::int64_t sample) const {
  const int idx = interval_index_at(sample);
  return idx < 0 ? 0 : torque_schedule[static_cast<std::size_t>(idx)].class_index;
}

void validate_manifest(const StreamManifest& m) {
  if (m.encoding != kStreamEncoding) {
    fail(ErrorCode::format, "unknown stream encoding '" + m.encoding + "'");
  }
  if (!(m.sample_rate_hz > 0.0) || !std::isfinite(m.sample_rate_hz)) {
    fail(ErrorCode::validation, "sample_rate_hz must be positive");
  }
  if (m.n_samples < 0) fail(ErrorCode::validation, "n_samples must be non-negative");
  if (m.num_classes < 2) fail(ErrorCode::validation, "num_classes must be >= 2");
  std::int64_t previous_end = 0;
  for (std::size_t i = 0; i < m.torque_schedule.size(); ++i) {
    const auto& iv = m.torque_schedule[i];
    const std::string where = "torque_schedule[" + std::to_string(i) + "]";
    if (iv.class_index < 1 || iv.class_index > m.num_classes) {
      fail(ErrorCode::validation, where + ": class_index out of 1.." + std::to_string(m.num_classes));
    }
    if (iv.start_sample < 0 || iv.end_sample <= iv.start_sample || iv.end_sample > m.n_samples) {
      fail(ErrorCode::validation, where + ": interval outside [0, n_samples) or empty");
    }
    if (iv.start_sample < previous_end) {
      fail(ErrorCode::validation, where + ": intervals overlap or are out of order");
    }
    previous_end = iv.end_sample;
  }
}

void validate_stream(const AEStream& s) {
  validate_manifest(s.manifest);
  if (static_cast<std::int64_t>(s.samples.size()) != s.manifest.n_samples) {
    fail(ErrorCode::validation, "sample count " + std::to_string(s.samples.size()) +
                                    " does not match manifest n_samples " +
                                    std::to_string(s.manifest.n_samples));
  }
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (!std::isfinite(s.samples[i])) {
      fail(ErrorCode::validation, "non-finite sample at index " + std::to_string(i));
    }
  }
}

json manifest_to_json(const StreamManifest& m) {
  json schedule = json::array();
  for (const auto& iv : m.torque_schedule) {
    schedule.push_back({{"class", iv.class_index}, {"start", iv.start_sample}, {"end", iv.end_sample}});
  }
  return json{{"encoding", m.encoding},
              {"campaign_id", m.campaign_id},
              {"sensor_id", m.sensor_id},
              {"sample_rate_hz", m.sample_rate_hz},
              {"n_samples", m.n_samples},
              {"num_classes", m.num_classes},
              {"torque_schedule", schedule},
              {"processing", m.processing}};
}

StreamManifest manifest_from_json(const json& j) {
  StreamManifest m;
  try {
    m.encoding = j.at("encoding").get<std::string>();
    if (m.encoding != kStreamEncoding) {
      fail(ErrorCode::format, "unknown stream encoding '" + m.encoding + "'");
    }
    m.campaign_id = j.at("campaign_id").get<std::string>();
    m.sensor_id = j.at("sensor_id").get<std::string>();
    m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    m.n_samples = j.at("n_samples").get<std::int64_t>();
    m.num_classes = j.value("num_classes", kDefaultNumClasses);
    for (const auto& iv : j.at("torque_schedule")) {
      m.torque_schedule.push_back({iv.at("class").get<int>(), iv.at("start").get<std::int64_t>(),
                                   iv.at("end").get<std::int64_t>()});
    }
    if (j.contains("processing")) m.processing = j.at("processing");
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("malformed stream manifest: ") + e.what());
  }
  return m;
}

std::string stream_base_path(const std::string& path) {
  for (const std::string ext : {".json", ".f32le"}) {
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
      return path.substr(0, path.size() - ext.size());
    }
  }
  return path;
}

namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

}  // namespace

void write_stream(const AEStream& stream, const std::string& path) {
  validate_stream(stream);
  const std::string base = stream_base_path(path);
  const fs::path parent = fs::path(base).parent_path();
  if (!parent.empty() && !fs::exists(parent)) {
    fail(ErrorCode::io, "directory does not exist: " + parent.string());
  }
  {
    std::ofstream out(base + ".f32le", std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + base + ".f32le");
    std::vector<std::uint32_t> words(stream.samples.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      words[i] = to_little_endian(std::bit_cast<std::uint32_t>(stream.samples[i]));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) fail(ErrorCode::io, "write failed: " + base + ".f32le");
  }
  write_text_file(base + ".json", manifest_to_json(stream.manifest).dump(2) + "\n");
}

AEStream read_stream(const std::string& path) {
  const std::string base = stream_base_path(path);
  if (!fs::exists(base + ".json")) fail(ErrorCode::io, "missing manifest " + base + ".json");
  if (!fs::exists(base + ".f32le")) fail(ErrorCode::io, "missing payload " + base + ".f32le");
  json j;
  try {
    j = json::parse(read_text_file(base + ".json"));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::format, base + ".json: " + e.what());
  }
  AEStream s;
  s.manifest = manifest_from_json(j);
  const auto bytes = fs::file_size(base + ".f32le");
  if (bytes % 4 != 0) fail(ErrorCode::format, "payload size is not a multiple of 4 bytes");
  const auto count = static_cast<std::int64_t>(bytes / 4);
  if (count != s.manifest.n_samples) {
    fail(ErrorCode::validation, "length mismatch: manifest says " + std::to_string(s.manifest.n_samples) +
                                    " samples, payload has " + std::to_string(count));
  }
  std::vector<std::uint32_t> words(static_cast<std::size_t>(count));
  std::ifstream in(base + ".f32le", std::ios::binary);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!in) fail(ErrorCode::io, "read failed: " + base + ".f32le");
  s.samples.resize(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    s.samples[i] = std::bit_cast<float>(to_little_endian(words[i]));
  }
  validate_stream(s);
  return s;
}

// --- synthetic campaigns -------------------------------------------------

void SyntheticSpec::set_log_spaced_freqs(double hi_hz, double lo_hz) {
  class_burst_freqs_hz.resize(static_cast<std::size_t>(std::max(n_levels, 0)));
  for (int c = 0; c < n_levels; ++c) {
    const double t = n_levels > 1 ? static_cast<double>(c) / (n_levels - 1) : 0.0;
    class_burst_freqs_hz[static_cast<std::size_t>(c)] = hi_hz * std::pow(lo_hz / hi_hz, t);
  }
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec s;
  s.set_log_spaced_freqs(24e3, 4e3);
  return s;
}

json synthetic_spec_to_json(const SyntheticSpec& s) {
  return json{{"sample_rate_hz", s.sample_rate_hz},
              {"excitation_hz", s.excitation_hz},
              {"seconds_per_level", s.seconds_per_level},
              {"n_levels", s.n_levels},
              {"snr_db", s.snr_db},
              {"bursts_per_cycle", s.bursts_per_cycle},
              {"class_burst_freqs_hz", s.class_burst_freqs_hz},
              {"seed", s.seed},
              {"campaign_id", s.campaign_id},
              {"sensor_id", s.sensor_id},
              {"burst_decay_cycles", s.burst_decay_cycles},
              {"detune_fraction", s.detune_fraction},
              {"gain_jitter", s.gain_jitter}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec s = default_synthetic_spec();
  try {
    s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
    s.excitation_hz = j.value("excitation_hz", s.excitation_hz);
    s.seconds_per_level = j.value("seconds_per_level", s.seconds_per_level);
    const int levels = j.value("n_levels", s.n_levels);
    if (levels != s.n_levels && !j.contains("class_burst_freqs_hz")) {
      s.n_levels = levels;
      s.set_log_spaced_freqs(24e3, 4e3);
    }
    s.n_levels = levels;
    s.snr_db = j.value("snr_db", s.snr_db);
    s.bursts_per_cycle = j.value("bursts_per_cycle", s.bursts_per_cycle);
    if (j.contains("class_burst_freqs_hz")) {
      s.class_burst_freqs_hz = j.at("class_burst_freqs_hz").get<std::vector<double>>();
    }
    s.seed = j.value("seed", s.seed);
    s.campaign_id = j.value("campaign_id", s.campaign_id);
    s.sensor_id = j.value("sensor_id", s.sensor_id);
    s.burst_decay_cycles = j.value("burst_decay_cycles", s.burst_decay_cycles);
    s.detune_fraction = j.value("detune_fraction", s.detune_fraction);
    s.gain_jitter = j.value("gain_jitter", s.gain_jitter);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("malformed synthetic spec: ") + e.what());
  }
  return s;
}

void validate_synthetic_spec(const SyntheticSpec& s) {
  const double nyquist = s.sample_rate_hz / 2.0;
  if (!(s.sample_rate_hz > 0.0)) fail(ErrorCode::invalid_argument, "sample_rate_hz must be positive");
  if (!(s.seconds_per_level > 0.0)) fail(ErrorCode::invalid_argument, "seconds_per_level must be positive");
  if (s.n_levels < 2) fail(ErrorCode::invalid_argument, "n_levels must be >= 2");
  if (s.bursts_per_cycle < 0) fail(ErrorCode::invalid_argument, "bursts_per_cycle must be >= 0");
  if (!(s.excitation_hz > 0.0) || s.excitation_hz >= nyquist) {
    fail(ErrorCode::invalid_argument, "excitation_hz must lie in (0, sample_rate/2)");
  }
  if (!(s.burst_decay_cycles > 0.0)) fail(ErrorCode::invalid_argument, "burst_decay_cycles must be positive");
  if (s.detune_fraction < 0.0 || s.detune_fraction >= 1.0) {
    fail(ErrorCode::invalid_argument, "detune_fraction must lie in [0, 1)");
  }
  if (s.gain_jitter < 0.0 || s.gain_jitter >= 1.0) {
    fail(ErrorCode::invalid_argument, "gain_jitter must lie in [0, 1)");
  }
  if (static_cast<int>(s.class_burst_freqs_hz.size()) != s.n_levels) {
    fail(ErrorCode::invalid_argument, "class_burst_freqs_hz needs one frequency per level");
  }
  const auto& f = s.class_burst_freqs_hz;
  bool increasing = true, decreasing = true;
  for (std::size_t i = 1; i < f.size(); ++i) {
    increasing = increasing && f[i] > f[i - 1];
    decreasing = decreasing && f[i] < f[i - 1];
  }
  if (!increasing && !decreasing) {
    fail(ErrorCode::invalid_argument, "class_burst_freqs_hz must be strictly monotone");
  }
  for (double hz : f) {
    if (!(hz > 0.0) || hz * (1.0 + s.detune_fraction) >= nyquist) {
      fail(ErrorCode::invalid_argument, "burst frequency " + std::to_string(hz) + " Hz violates Nyquist");
    }
  }
}

double peak_to_peak(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

double peak_to_peak_snr_db(std::span<const double> clean, std::span<const double> noise) {
  return 10.0 * std::log10(peak_to_peak(clean) / peak_to_peak(noise));
}

SyntheticParts generate_synthetic_parts(const SyntheticSpec& spec) {
  validate_synthetic_spec(spec);
  const double fs = spec.sample_rate_hz;
  const auto level_len = static_cast<std::int64_t>(std::llround(fs * spec.seconds_per_level));
  if (level_len < 1) fail(ErrorCode::invalid_argument, "seconds_per_level shorter than one sample");
  const std::int64_t n = level_len * spec.n_levels;

  StreamManifest manifest;
  manifest.campaign_id = spec.campaign_id;
  manifest.sample_rate_hz = fs;
  manifest.n_samples = n;
  manifest.num_classes = spec.n_levels;
  for (int c = 1; c <= spec.n_levels; ++c) {
    manifest.torque_schedule.push_back({c, (c - 1) * level_len, c * level_len});
  }
  manifest.processing = json::array({{{"op", "synthetic"}, {"spec", synthetic_spec_to_json(spec)}}});

  SyntheticParts parts;
  auto& vib = parts.streams.vibrometer;
  vib.manifest = manifest;
  vib.manifest.sensor_id = "vibrometer";
  vib.samples.resize(static_cast<std::size_t>(n));
  const double omega_exc = 2.0 * std::numbers::pi * spec.excitation_hz / fs;
  for (std::int64_t i = 0; i < n; ++i) {
    vib.samples[static_cast<std::size_t>(i)] = static_cast<float>(std::sin(omega_exc * static_cast<double>(i)));
  }

  // Burst events depend only on the campaign seed, so every sensor of one
  // campaign records the same events.
  std::mt19937_64 events(mix_seed(spec.seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double detune = 1.0 + spec.detune_fraction * (2.0 * unit(events) - 1.0);

  parts.clean.assign(static_cast<std::size_t>(n), 0.0);
  const double period = fs / spec.excitation_hz;
  for (std::int64_t k = 0;; ++k) {
    const double cycle_start = (static_cast<double>(k) + 0.5) * period;
    if (cycle_start >= static_cast<double>(n)) break;
    for (int b = 0; b < spec.bursts_per_cycle; ++b) {
      const double onset = cycle_start + (0.15 + 0.45 * unit(events)) * period;
      const double amplitude = 1.0 + spec.gain_jitter * (2.0 * unit(events) - 1.0);
      const auto first = static_cast<std::int64_t>(std::ceil(onset));
      if (first >= n) continue;
      const int cls = manifest.class_at(first);
      if (cls == 0) continue;
      const double freq = spec.class_burst_freqs_hz[static_cast<std::size_t>(cls - 1)] * detune;
      const double tau = spec.burst_decay_cycles * fs / freq;
      const auto last = std::min<std::int64_t>(n, first + static_cast<std::int64_t>(std::ceil(8.0 * tau)));
      const double omega = 2.0 * std::numbers::pi * freq / fs;
      for (std::int64_t i = first; i < last; ++i) {
        const double dt = static_cast<double>(i) - onset;
        parts.clean[static_cast<std::size_t>(i)] += amplitude * std::exp(-dt / tau) * std::sin(omega * dt);
      }
    }
  }

  std::mt19937_64 noise_rng(mix_seed(spec.seed ^ hash_name(spec.sensor_id), 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  parts.noise.resize(static_cast<std::size_t>(n));
  for (auto& v : parts.noise) v = gauss(noise_rng);
  const double pp_noise = peak_to_peak(parts.noise);
  const double pp_signal = peak_to_peak(parts.clean);
  if (pp_noise > 0.0 && pp_signal > 0.0) {
    const double scale = pp_signal / std::pow(10.0, spec.snr_db / 10.0) / pp_noise;
    for (auto& v : parts.noise) v *= scale;
  }

  auto& ae = parts.streams.ae;
  ae.manifest = manifest;
  ae.manifest.sensor_id = spec.sensor_id;
  ae.samples.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ae.samples.size(); ++i) {
    ae.samples[i] = static_cast<float>(parts.clean[i] + parts.noise[i]);
  }
  return parts;
}

SyntheticStreams generate_synthetic(const SyntheticSpec& spec) {
  return std::move(generate_synthetic_parts(spec).streams);
}

}  // namespace aet
