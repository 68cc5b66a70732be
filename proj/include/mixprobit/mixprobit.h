/*
 * C interface to the mixprobit library: locally adaptive binary regression
 * with reversible-jump mixtures of probit spline experts.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_destroy function. Every fallible call returns an mp_status;
 * on failure mp_last_error() describes the problem (thread-local, valid
 * until the next failing call on the same thread).
 *
 * Matrices are passed row-major.
 */
#ifndef MIXPROBIT_H
#define MIXPROBIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MP_API __declspec(dllexport)
#else
#define MP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mp_status {
  MP_OK = 0,
  MP_ERR_USAGE = 1,     /* invalid argument or configuration */
  MP_ERR_DATA = 2,      /* malformed or inconsistent input data */
  MP_ERR_NUMERICAL = 3, /* sampler or linear algebra failure */
  MP_ERR_IO = 4,        /* file could not be read or written */
  MP_ERR_INTERNAL = 5
} mp_status;

typedef struct mp_config mp_config;
typedef struct mp_dataset mp_dataset;
typedef struct mp_model mp_model;
typedef struct mp_study mp_study;

typedef struct mp_fit_report {
  double rj_acceptance;
  double delta_acceptance;
  double seconds;
  int64_t knots;
  int64_t rank;
  double energy_ratio;
  int64_t draws;
} mp_fit_report;

typedef struct mp_evaluation {
  double askld;
  double ase;
  double coverage;       /* fraction of points whose interval holds the truth */
  double pct_delta_aecp; /* percentage deviation of coverage from the level */
  double auc;            /* NaN when the truth file has no responses */
  double pct_delta_ase;  /* NaN unless a baseline estimate is given */
} mp_evaluation;

MP_API const char* mp_last_error(void);
MP_API const char* mp_version(void);
/* 0 quiet, 1 warnings (default), 2 info. */
MP_API void mp_set_log_level(int level);

/* Configuration. Keys use dotted section paths, e.g. "prior.c_alpha",
 * "chain.warmup", "simulation.function", or "seed". */
MP_API mp_status mp_config_create(mp_config** out);
MP_API mp_status mp_config_load(const char* path, mp_config** out);
MP_API mp_status mp_config_set_number(mp_config* config, const char* key, double value);
MP_API mp_status mp_config_set_string(mp_config* config, const char* key, const char* value);
MP_API mp_status mp_config_get_number(const mp_config* config, const char* key, double* value);
MP_API mp_status mp_config_save(const mp_config* config, const char* path);
MP_API void mp_config_destroy(mp_config* config);

/* Datasets. */
MP_API mp_status mp_dataset_load_csv(const char* path, mp_dataset** out);
MP_API mp_status mp_dataset_simulate(const char* function, int64_t n, uint64_t seed,
                                     int negated_peak, mp_dataset** out);
MP_API mp_status mp_dataset_save_csv(const mp_dataset* data, const char* path);
MP_API size_t mp_dataset_rows(const mp_dataset* data);
MP_API size_t mp_dataset_cols(const mp_dataset* data);
MP_API void mp_dataset_destroy(mp_dataset* data);

/* Fitting and prediction. trace_path may be NULL; otherwise one JSON record
 * per retained draw is written to it. report may be NULL. */
MP_API mp_status mp_fit(const mp_dataset* data, const mp_config* config, const char* trace_path,
                        mp_model** out, mp_fit_report* report);
MP_API mp_status mp_model_save(const mp_model* model, const char* path);
MP_API mp_status mp_model_load(const char* path, mp_model** out);
MP_API int mp_model_max_components(const mp_model* model);
MP_API size_t mp_model_dimension(const mp_model* model);
MP_API size_t mp_model_training_rows(const mp_model* model);
MP_API mp_status mp_model_probabilities(const mp_model* model, double* out, size_t len);
MP_API mp_status mp_model_fitted(const mp_model* model, double* prob, double* low, double* high,
                                 size_t len);
MP_API mp_status mp_model_predict(const mp_model* model, const double* points, size_t rows,
                                  size_t cols, double* prob, double* low, double* high);
/* Reads covariates from points_path and writes prob,low,high rows. */
MP_API mp_status mp_model_predict_csv(const mp_model* model, const char* points_path,
                                      const char* out_path);
MP_API void mp_model_destroy(mp_model* model);

/* Metrics. */
MP_API mp_status mp_askld(const double* truth, const double* estimate, size_t n, double* out);
MP_API mp_status mp_ase(const double* truth, const double* estimate, size_t n, double* out);
MP_API mp_status mp_pct_delta_ase(double ase_other, double ase_self, double* out);
MP_API mp_status mp_pct_delta_aecp(const int* hits, size_t replications, size_t n,
                                   double nominal, double* out);
/* thresholds/tpr/fpr need capacity n + 1; *points receives the count. */
MP_API mp_status mp_roc(const int* labels, const double* scores, size_t n, double* thresholds,
                        double* tpr, double* fpr, size_t* points, double* auc);
/* truth_path: CSV with true_prob (and optionally w); estimate_path and the
 * optional baseline_path: CSV with prob,low,high. out_path gets metric,value
 * rows; roc_path (optional) gets threshold,fpr,tpr rows. */
MP_API mp_status mp_evaluate_csv(const char* truth_path, const char* estimate_path,
                                 const char* baseline_path, double level, const char* out_path,
                                 const char* roc_path, mp_evaluation* result);

/* Simulation study over the config's simulation section. */
MP_API mp_status mp_study_run(const mp_config* config, int jobs, mp_study** out);
MP_API mp_status mp_study_write(const mp_study* study, const char* path,
                                const char* coverage_path);
MP_API mp_status mp_study_model_probs(const mp_study* study, double* out, size_t len);
MP_API int mp_study_succeeded(const mp_study* study);
MP_API void mp_study_destroy(mp_study* study);

#ifdef __cplusplus
}
#endif

#endif /* MIXPROBIT_H */
