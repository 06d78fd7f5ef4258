// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "core/common.hpp"

namespace aet {

inline constexpr const char* kStreamEncoding = "f32le-v1";

/// Half-open sample interval [start_sample, end_sample) recorded at one
/// torque level. class_index 1 is the tightest level (60 cNm), K the loosest.
struct TorqueInterval {
  int class_index = 1;
  std::int64_t start_sample = 0;
  std::int64_t end_sample = 0;

  bool contains(std::int64_t sample) const {
    return sample >= start_sample && sample < end_sample;
  }
  bool operator==(const TorqueInterval&) const = default;
};

struct StreamManifest {
  std::string campaign_id;
  std::string sensor_id;
  double sample_rate_hz = 0.0;
  std::int64_t n_samples = 0;
  std::vector<TorqueInterval> torque_schedule;
  int num_classes = kDefaultNumClasses;
  std::string encoding = kStreamEncoding;
  /// Processing history (e.g. denoising parameters), free-form.
  nlohmann::json processing = nlohmann::json::array();

  /// Class of the interval containing `sample`, or 0 when unlabeled.
  int class_at(std::int64_t sample) const;
  /// Index into torque_schedule of the interval containing `sample`, or -1.
  int interval_index_at(std::int64_t sample) const;

  bool operator==(const StreamManifest&) const = default;
};

/// One sensor channel. Samples are volts stored as 32-bit floats so that a
/// write/read cycle is bit-exact.
struct AEStream {
  StreamManifest manifest;
  std::vector<float> samples;

  bool operator==(const AEStream&) const = default;
};

void validate_manifest(const StreamManifest& m);
void validate_stream(const AEStream& s);

nlohmann::json manifest_to_json(const StreamManifest& m);
StreamManifest manifest_from_json(const nlohmann::json& j);

/// Strips a trailing ".json" or ".f32le" so either file of a pair names it.
std::string stream_base_path(const std::string& path);

/// Writes `<base>.json` and `<base>.f32le`.
void write_stream(const AEStream& stream, const std::string& path);
AEStream read_stream(const std::string& path);

/// Parameters of a synthetic campaign: a vibrometer sine and an AE channel
/// carrying one damped burst family per class, buried in white noise.
struct SyntheticSpec {
  double sample_rate_hz = 100e3;
  double excitation_hz = 120.0;
  double seconds_per_level = 1.0;
  int n_levels = kDefaultNumClasses;
  /// Peak-to-peak SNR, 10*log10(pp_signal / pp_noise).
  double snr_db = 2.3;
  int bursts_per_cycle = 1;
  /// Burst centre frequency per class, strictly monotone in class index.
  std::vector<double> class_burst_freqs_hz;
  std::uint64_t seed = 1;

  std::string campaign_id = "A";
  std::string sensor_id = "synthetic";
  /// Burst e-folding time in periods of the burst frequency.
  double burst_decay_cycles = 6.0;
  /// Per-campaign relative detuning of all burst frequencies, drawn from
  /// U(-detune_fraction, +detune_fraction).
  double detune_fraction = 0.02;
  /// Per-burst amplitude jitter, amplitude = 1 + U(-gain_jitter, +gain_jitter).
  double gain_jitter = 0.2;

  /// Fills class_burst_freqs_hz with n_levels log-spaced frequencies
  /// decreasing from hi_hz (class 1) to lo_hz (class n_levels).
  void set_log_spaced_freqs(double hi_hz, double lo_hz);
};

SyntheticSpec default_synthetic_spec();
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& s);
/// Missing keys keep their defaults.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
void validate_synthetic_spec(const SyntheticSpec& s);

struct SyntheticStreams {
  AEStream vibrometer;
  AEStream ae;
};

/// Same streams plus the clean burst train and the scaled noise that were
/// summed into the AE channel (before float rounding).
struct SyntheticParts {
  SyntheticStreams streams;
  std::vector<double> clean;
  std::vector<double> noise;
};

SyntheticStreams generate_synthetic(const SyntheticSpec& spec);
SyntheticParts generate_synthetic_parts(const SyntheticSpec& spec);

double peak_to_peak(std::span<const double> x);
/// 10*log10(pp(clean) / pp(noise)).
double peak_to_peak_snr_db(std::span<const double> clean, std::span<const double> noise);

}  // namespace aet
