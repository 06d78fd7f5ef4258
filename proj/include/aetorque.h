/* SPDX-License-Identifier: Apache-2.0 */
#ifndef AETORQUE_H
#define AETORQUE_H

#include <stddef.h>
#include <stdint.h>

#if defined(AET_BUILDING_LIBRARY)
#define AET_API __attribute__((visibility("default")))
#else
#define AET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aet_status {
  AET_OK = 0,
  AET_ERR_INVALID_ARGUMENT = 1,
  AET_ERR_IO = 2,
  AET_ERR_FORMAT = 3,
  AET_ERR_VALIDATION = 4,
  AET_ERR_NUMERIC = 5,
  AET_ERR_INTERNAL = 6
} aet_status;

AET_API const char* aet_version(void);
/* Message of the last failed call on this thread; "" after success. */
AET_API const char* aet_last_error(void);
AET_API const char* aet_status_name(aet_status status);
/* Frees strings returned through char** out-parameters. */
AET_API void aet_string_free(char* s);

/* ---- streams ---- */
typedef struct aet_stream aet_stream;

/* path may name either the .json manifest or the .f32le payload. */
AET_API aet_status aet_stream_read(const char* path, aet_stream** out);
AET_API aet_status aet_stream_write(const aet_stream* stream, const char* path);
AET_API aet_status aet_stream_create(const char* manifest_json, const float* samples, size_t n_samples,
                                     aet_stream** out);
AET_API int64_t aet_stream_n_samples(const aet_stream* stream);
AET_API const float* aet_stream_samples(const aet_stream* stream);
AET_API aet_status aet_stream_manifest_json(const aet_stream* stream, char** out);
AET_API void aet_stream_free(aet_stream* stream);

/* Level 0 copies the stream unchanged. jobs 0 = all cores. */
AET_API aet_status aet_denoise(const aet_stream* in, int level, double block_seconds, size_t jobs,
                               aet_stream** out);

/* Writes up to `capacity` crossing indices; *count receives the total. */
AET_API aet_status aet_zero_crossings(const float* signal, size_t n, int64_t* out, size_t capacity,
                                      size_t* count);

/* ---- continuous wavelet transform ---- */
typedef struct aet_filter_bank aet_filter_bank;

/* total_filters > 0 overrides voices_per_octave (12 gives the literal bank). */
AET_API aet_status aet_filter_bank_create(double sample_rate_hz, size_t n_fft, double voices_per_octave,
                                          int octaves, int total_filters, aet_filter_bank** out);
AET_API size_t aet_filter_bank_n_scales(const aet_filter_bank* bank);
AET_API const double* aet_filter_bank_center_freqs(const aet_filter_bank* bank);
/* out receives n_scales x n magnitudes, row-major. */
AET_API aet_status aet_cwt(const aet_filter_bank* bank, const double* samples, size_t n, double* out);
AET_API void aet_filter_bank_free(aet_filter_bank* bank);

/* ---- losses and schedule ---- */
/* kind: cre|cdw1|cdw2|cdf|pom1a|pom1b; target is 1-based. */
AET_API aet_status aet_loss_value(const char* kind, int target, const double* p, size_t k, double* out);
/* Either gradient pointer may be NULL. */
AET_API aet_status aet_loss_grad(const char* kind, int target, const double* p, size_t k, double* grad_p,
                                 double* grad_logits);
AET_API aet_status aet_onecycle_lr(double lr_max, int64_t total_iterations, int64_t iteration, double* out);

/* ---- metrics ---- */
typedef struct aet_confusion aet_confusion;

AET_API aet_status aet_confusion_create(int num_classes, aet_confusion** out);
AET_API aet_status aet_confusion_accumulate(aet_confusion* cm, int true_class, int predicted_class);
AET_API aet_status aet_confusion_set(aet_confusion* cm, int true_class, int predicted_class, int64_t value);
AET_API aet_status aet_confusion_merge(aet_confusion* into, const aet_confusion* other);
AET_API aet_status aet_confusion_acc(const aet_confusion* cm, double* acc, double* acc_pm1);
/* recall/precision may be NULL or hold num_classes entries (NaN when undefined). */
AET_API aet_status aet_confusion_prf_pm1(const aet_confusion* cm, double* recall, double* precision,
                                         double* mean_recall, double* mean_precision, double* f1);
AET_API aet_status aet_confusion_metrics_json(const aet_confusion* cm, char** out);
AET_API void aet_confusion_free(aet_confusion* cm);

/* ---- trained models ---- */
typedef struct aet_model aet_model;

AET_API aet_status aet_model_load(const char* path, aet_model** out);
AET_API int aet_model_num_classes(const aet_model* model);
AET_API size_t aet_model_feature_dim(const aet_model* model);
/* probs receives num_classes values; *predicted (nullable) the 1-based class. */
AET_API aet_status aet_model_predict(const aet_model* model, const double* features, size_t dim, double* probs,
                                     int* predicted);
AET_API void aet_model_free(aet_model* model);

/* ---- pipeline stages ---- */
/* Runs synth|segment|denoise|scalogram|dataset|train|eval|predict|sweep|report
   with a flat JSON config. result_json (nullable) receives a JSON summary. */
AET_API aet_status aet_run_stage(const char* stage, const char* config_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* AETORQUE_H */
