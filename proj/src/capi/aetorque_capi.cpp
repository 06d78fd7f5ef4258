// SPDX-License-Identifier: Apache-2.0
#include "aetorque.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "core/cwt.hpp"
#include "core/denoise.hpp"
#include "core/ingest.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/optsched.hpp"
#include "core/ref_trainer.hpp"
#include "core/segmentation.hpp"
#include "core/stages.hpp"

struct aet_stream {
  aet::AEStream stream;
};
struct aet_filter_bank {
  aet::MorseFilterBank bank;
};
struct aet_confusion {
  aet::ConfusionMatrix cm;
};
struct aet_model {
  aet::LinearSoftmaxModel model;
};

namespace {

thread_local std::string g_last_error;

template <class F>
aet_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return AET_OK;
  } catch (const aet::Error& e) {
    g_last_error = e.what();
    return static_cast<aet_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return AET_ERR_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AET_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AET_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return AET_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) aet::fail(aet::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* aet_version(void) { return AET_VERSION; }
const char* aet_last_error(void) { return g_last_error.c_str(); }

const char* aet_status_name(aet_status status) {
  switch (status) {
    case AET_OK: return "ok";
    case AET_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case AET_ERR_IO: return "io";
    case AET_ERR_FORMAT: return "format";
    case AET_ERR_VALIDATION: return "validation";
    case AET_ERR_NUMERIC: return "numeric";
    case AET_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void aet_string_free(char* s) { delete[] s; }

aet_status aet_stream_read(const char* path, aet_stream** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new aet_stream{aet::read_stream(path)};
  });
}

aet_status aet_stream_write(const aet_stream* stream, const char* path) {
  return guarded([&] {
    require(stream && path, "null argument");
    aet::write_stream(stream->stream, path);
  });
}

aet_status aet_stream_create(const char* manifest_json, const float* samples, size_t n_samples, aet_stream** out) {
  return guarded([&] {
    require(manifest_json && out && (samples || n_samples == 0), "null argument");
    aet::AEStream s;
    s.manifest = aet::manifest_from_json(nlohmann::json::parse(manifest_json));
    s.samples.assign(samples, samples + n_samples);
    aet::validate_stream(s);
    *out = new aet_stream{std::move(s)};
  });
}

int64_t aet_stream_n_samples(const aet_stream* stream) {
  return stream ? static_cast<int64_t>(stream->stream.samples.size()) : 0;
}

const float* aet_stream_samples(const aet_stream* stream) { return stream ? stream->stream.samples.data() : nullptr; }

aet_status aet_stream_manifest_json(const aet_stream* stream, char** out) {
  return guarded([&] {
    require(stream && out, "null argument");
    *out = dup_string(aet::manifest_to_json(stream->stream.manifest).dump());
  });
}

void aet_stream_free(aet_stream* stream) { delete stream; }

aet_status aet_denoise(const aet_stream* in, int level, double block_seconds, size_t jobs, aet_stream** out) {
  return guarded([&] {
    require(in && out, "null argument");
    aet::DenoiseConfig cfg;
    cfg.level = level;
    cfg.block_seconds = block_seconds;
    *out = new aet_stream{aet::denoise_stream(in->stream, cfg, jobs)};
  });
}

aet_status aet_zero_crossings(const float* signal, size_t n, int64_t* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require((signal || n == 0) && count && (out || capacity == 0), "null argument");
    const auto zc = aet::zero_crossings(std::span<const float>(signal, n));
    *count = zc.size();
    for (size_t i = 0; i < zc.size() && i < capacity; ++i) out[i] = zc[i];
  });
}

aet_status aet_filter_bank_create(double sample_rate_hz, size_t n_fft, double voices_per_octave, int octaves,
                                  int total_filters, aet_filter_bank** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    aet::FilterBankConfig cfg;
    cfg.sample_rate_hz = sample_rate_hz;
    cfg.n_fft = n_fft;
    cfg.voices_per_octave = voices_per_octave;
    cfg.octaves = octaves;
    cfg.total_filters = total_filters;
    *out = new aet_filter_bank{aet::MorseFilterBank::build(cfg)};
  });
}

size_t aet_filter_bank_n_scales(const aet_filter_bank* bank) { return bank ? bank->bank.n_scales() : 0; }

const double* aet_filter_bank_center_freqs(const aet_filter_bank* bank) {
  return bank ? bank->bank.center_freqs_hz().data() : nullptr;
}

aet_status aet_cwt(const aet_filter_bank* bank, const double* samples, size_t n, double* out) {
  return guarded([&] {
    require(bank && samples && out, "null argument");
    const auto s = aet::cwt(std::span<const double>(samples, n), bank->bank);
    std::copy(s.magnitudes.begin(), s.magnitudes.end(), out);
  });
}

void aet_filter_bank_free(aet_filter_bank* bank) { delete bank; }

aet_status aet_loss_value(const char* kind, int target, const double* p, size_t k, double* out) {
  return guarded([&] {
    require(kind && p && out, "null argument");
    *out = aet::loss_value(aet::parse_loss_kind(kind), {target}, std::span<const double>(p, k));
  });
}

aet_status aet_loss_grad(const char* kind, int target, const double* p, size_t k, double* grad_p,
                         double* grad_logits) {
  return guarded([&] {
    require(kind && p, "null argument");
    const auto g = aet::loss_grad(aet::parse_loss_kind(kind), {target}, std::span<const double>(p, k));
    if (grad_p) std::copy(g.wrt_probabilities.begin(), g.wrt_probabilities.end(), grad_p);
    if (grad_logits) std::copy(g.wrt_logits.begin(), g.wrt_logits.end(), grad_logits);
  });
}

aet_status aet_onecycle_lr(double lr_max, int64_t total_iterations, int64_t iteration, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    aet::OneCycleConfig cfg;
    cfg.lr_max = lr_max;
    cfg.total_iterations = total_iterations;
    *out = aet::lr_at(cfg, iteration);
  });
}

aet_status aet_confusion_create(int num_classes, aet_confusion** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new aet_confusion{aet::ConfusionMatrix(num_classes)};
  });
}

aet_status aet_confusion_accumulate(aet_confusion* cm, int true_class, int predicted_class) {
  return guarded([&] {
    require(cm != nullptr, "null argument");
    cm->cm.accumulate(true_class, predicted_class);
  });
}

aet_status aet_confusion_set(aet_confusion* cm, int true_class, int predicted_class, int64_t value) {
  return guarded([&] {
    require(cm != nullptr, "null argument");
    cm->cm.set(true_class, predicted_class, value);
  });
}

aet_status aet_confusion_merge(aet_confusion* into, const aet_confusion* other) {
  return guarded([&] {
    require(into && other, "null argument");
    into->cm.merge(other->cm);
  });
}

aet_status aet_confusion_acc(const aet_confusion* cm, double* acc, double* acc_pm1) {
  return guarded([&] {
    require(cm != nullptr, "null argument");
    if (acc) *acc = aet::accuracy(cm->cm);
    if (acc_pm1) *acc_pm1 = aet::accuracy_pm1(cm->cm);
  });
}

aet_status aet_confusion_prf_pm1(const aet_confusion* cm, double* recall, double* precision, double* mean_recall,
                                 double* mean_precision, double* f1) {
  return guarded([&] {
    require(cm != nullptr, "null argument");
    const auto s = aet::prf_pm1(cm->cm);
    if (recall) std::copy(s.recall.begin(), s.recall.end(), recall);
    if (precision) std::copy(s.precision.begin(), s.precision.end(), precision);
    if (mean_recall) *mean_recall = s.mean_recall;
    if (mean_precision) *mean_precision = s.mean_precision;
    if (f1) *f1 = s.f1;
  });
}

aet_status aet_confusion_metrics_json(const aet_confusion* cm, char** out) {
  return guarded([&] {
    require(cm && out, "null argument");
    *out = dup_string(aet::metrics_to_json(cm->cm).dump(2));
  });
}

void aet_confusion_free(aet_confusion* cm) { delete cm; }

aet_status aet_model_load(const char* path, aet_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new aet_model{aet::load_model(path)};
  });
}

int aet_model_num_classes(const aet_model* model) { return model ? model->model.num_classes : 0; }
size_t aet_model_feature_dim(const aet_model* model) { return model ? model->model.feature_dim : 0; }

aet_status aet_model_predict(const aet_model* model, const double* features, size_t dim, double* probs,
                             int* predicted) {
  return guarded([&] {
    require(model && features && probs, "null argument");
    require(dim == model->model.feature_dim, "feature dimension does not match the model");
    const auto p = aet::predict(model->model, std::span<const double>(features, dim));
    std::copy(p.begin(), p.end(), probs);
    if (predicted) *predicted = aet::argmax_class(p);
  });
}

void aet_model_free(aet_model* model) { delete model; }

aet_status aet_run_stage(const char* stage, const char* config_json, char** result_json) {
  return guarded([&] {
    require(stage && config_json, "null argument");
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      aet::fail(aet::ErrorCode::invalid_argument, std::string("config is not valid JSON: ") + e.what());
    }
    const auto result = aet::run_stage(stage, cfg);
    if (result_json) *result_json = dup_string(result.dump());
  });
}

}  // extern "C"
