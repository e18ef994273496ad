/*
 * fpcg - fetal phonocardiography benchmarking library.
 *
 * C interface over the C++ core: opaque handles, integer status codes, and
 * JSON strings for structured configuration and reports. All functions
 * return FPCG_OK on success; on failure fpcg_last_error() describes the
 * problem for the calling thread.
 */
#ifndef FPCG_H
#define FPCG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FPCG_API __declspec(dllexport)
#else
#define FPCG_API __attribute__((visibility("default")))
#endif

typedef enum fpcg_status {
  FPCG_OK = 0,
  FPCG_ERR_INVALID = 1, /* bad argument or configuration */
  FPCG_ERR_IO = 2,      /* file system failure */
  FPCG_ERR_FORMAT = 3,  /* malformed file or JSON */
  FPCG_ERR_NUMERIC = 4, /* numerical failure */
  FPCG_ERR_UNKNOWN = 5
} fpcg_status;

typedef enum fpcg_kind { FPCG_S1 = 0, FPCG_S2 = 1 } fpcg_kind;

typedef struct fpcg_record fpcg_record;       /* sampled signal */
typedef struct fpcg_events fpcg_events;       /* annotations or detections */
typedef struct fpcg_fhr_series fpcg_fhr_series;
typedef struct fpcg_model fpcg_model;         /* trained segmentation model */

FPCG_API const char* fpcg_version(void);
/* thread-local message for the most recent failure */
FPCG_API const char* fpcg_last_error(void);

/* ---- records ---- */
FPCG_API fpcg_status fpcg_record_load_wav(const char* path, fpcg_record** out);
FPCG_API fpcg_status fpcg_record_save_wav(const fpcg_record* rec, const char* path, int bits_per_sample);
FPCG_API fpcg_status fpcg_record_create(const char* id, const double* samples, size_t n, double fs,
                                        fpcg_record** out);
FPCG_API double fpcg_record_fs(const fpcg_record* rec);
FPCG_API size_t fpcg_record_size(const fpcg_record* rec);
FPCG_API const char* fpcg_record_id(const fpcg_record* rec);
FPCG_API fpcg_status fpcg_record_samples(const fpcg_record* rec, double* buf, size_t bufcap);
FPCG_API fpcg_status fpcg_record_resample(const fpcg_record* rec, double target_fs, fpcg_record** out);
FPCG_API void fpcg_record_free(fpcg_record* rec);

/* ---- events (header `t_s,kind`, kind in {S1, S2}) ---- */
FPCG_API fpcg_status fpcg_events_load_annotations(const char* path, fpcg_events** out);
FPCG_API fpcg_status fpcg_events_load_detections(const char* path, fpcg_events** out);
FPCG_API fpcg_status fpcg_events_save_csv(const fpcg_events* events, const char* path);
FPCG_API fpcg_status fpcg_events_create(const double* times_s, const int* kinds, size_t n, fpcg_events** out);
FPCG_API size_t fpcg_events_size(const fpcg_events* events);
FPCG_API fpcg_status fpcg_events_get(const fpcg_events* events, size_t index, double* t_s, int* kind);
FPCG_API void fpcg_events_free(fpcg_events* events);

/* ---- simulation ----
 * config_json mirrors the simulator configuration (see README). Outputs may
 * be NULL when not wanted; meta_json receives a malloc'd string describing
 * seed, SNR and scale (free with fpcg_string_free).
 */
FPCG_API fpcg_status fpcg_simulate(const char* config_json, fpcg_record** rec, fpcg_events** annotations,
                                   fpcg_fhr_series** truth_fhr, char** meta_json);

/* ---- detection ----
 * method: teager | rms | heuristic | hsmm | lr-hsmm | kfd
 * preset: optional named parameter set (schmidt, springer, mueller, ...)
 * config_json: optional parameter overrides; model required for hsmm/lr-hsmm.
 */
FPCG_API fpcg_status fpcg_detect(const fpcg_record* rec, const char* method, const char* preset,
                                 const char* config_json, const fpcg_model* model, fpcg_events** out);

/* ---- segmentation models ---- */
FPCG_API fpcg_status fpcg_train(const fpcg_record* const* recs, const fpcg_events* const* annotations,
                                size_t n, const char* method, const char* preset, const char* config_json,
                                fpcg_model** out);
FPCG_API fpcg_status fpcg_model_save(const fpcg_model* model, const char* path);
FPCG_API fpcg_status fpcg_model_load(const char* path, fpcg_model** out);
FPCG_API void fpcg_model_free(fpcg_model* model);

/* ---- heart-rate series ---- */
FPCG_API fpcg_status fpcg_fhr_from_events(const fpcg_events* events, double duration_s,
                                          const char* config_json, fpcg_fhr_series** out);
/* method: tang | zahorian */
FPCG_API fpcg_status fpcg_fhr_estimate(const fpcg_record* rec, const char* method, const char* config_json,
                                       fpcg_fhr_series** out);
FPCG_API size_t fpcg_fhr_size(const fpcg_fhr_series* series);
FPCG_API fpcg_status fpcg_fhr_get(const fpcg_fhr_series* series, size_t index, double* center_s, double* bpm,
                                  int* is_gap);
FPCG_API fpcg_status fpcg_fhr_save_csv(const fpcg_fhr_series* series, const char* path);
FPCG_API fpcg_status fpcg_fhr_load_csv(const char* path, double window_s, double overlap,
                                       fpcg_fhr_series** out);
FPCG_API fpcg_status fpcg_fhr_mse(const fpcg_fhr_series* est, const fpcg_fhr_series* ref, double* mse,
                                  int* is_gap);
FPCG_API void fpcg_fhr_free(fpcg_fhr_series* series);

/* ---- evaluation ----
 * report_json: per-kind counts/scores/MAE, error rates, and FHR MSE for one
 * record (free with fpcg_string_free).
 */
FPCG_API fpcg_status fpcg_evaluate(const fpcg_events* labels, const fpcg_events* detections,
                                   double duration_s, double tolerance_s, char** report_json);
/* merge per-record reports produced by fpcg_evaluate into one aggregate */
FPCG_API fpcg_status fpcg_aggregate_reports(const char* const* report_jsons, size_t n, const char* method,
                                            double tolerance_s, char** report_json);
/* CSV `tolerance_ms,ppv,f1` for one kind over ascending tolerances */
FPCG_API fpcg_status fpcg_score_vs_tolerance(const fpcg_events* labels, const fpcg_events* detections,
                                             int kind, const double* tolerances_s, size_t n, char** csv_out);
/* same curve pooled over many records (counts summed per tolerance) */
FPCG_API fpcg_status fpcg_score_vs_tolerance_pooled(const fpcg_events* const* labels,
                                                    const fpcg_events* const* detections, size_t n_records,
                                                    int kind, const double* tolerances_s, size_t n,
                                                    char** csv_out);
/* k-fold cross validation of a trainable method; the report carries fold
 * assignments, per-record and aggregate scores */
FPCG_API fpcg_status fpcg_crossval(const fpcg_record* const* recs, const fpcg_events* const* annotations,
                                   size_t n, const char* method, const char* preset, const char* config_json,
                                   int k, double tolerance_s, uint64_t seed, char** report_json);
/* mean/sd/min/max/iqr summary of per-record MSE values as JSON */
FPCG_API fpcg_status fpcg_fhr_aggregate_stats(const double* mse_values, size_t n, char** stats_json);
/* envelope/energy dump: name in {hilbert, homomorphic, teager, rms, psd, dwt} */
FPCG_API fpcg_status fpcg_envelope(const fpcg_record* rec, const char* name, const char* config_json,
                                   double** values, size_t* n, double* rate_hz);

FPCG_API void fpcg_string_free(char* s);
FPCG_API void fpcg_buffer_free(double* p);

#ifdef __cplusplus
}
#endif

#endif /* FPCG_H */
