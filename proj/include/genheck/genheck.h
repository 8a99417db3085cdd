/*
 * genheck: maximum-likelihood estimation, inference and diagnostics for the
 * generalized Heckman sample-selection model.
 *
 * C interface. Objects are opaque handles released with the matching
 * *_destroy function. Every function returning gh_status reports failures
 * through a status code; the message for the most recent failure on the
 * calling thread is available from gh_last_error().
 *
 * Matrices are passed row-major. Parameter vectors are flattened in the
 * order (beta, gamma, lambda, kappa): outcome, selection, dispersion and
 * correlation coefficients.
 */
#ifndef GENHECK_GENHECK_H
#define GENHECK_GENHECK_H

#include <stddef.h>
#include <stdint.h>

#if defined(GENHECK_BUILDING_LIBRARY)
#define GH_API __attribute__((visibility("default")))
#else
#define GH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define GENHECK_API_VERSION 1u

typedef enum gh_status {
  GH_OK = 0,
  GH_ERR_INVALID_ARGUMENT = 1,
  GH_ERR_DIMENSION_MISMATCH = 2,
  GH_ERR_DOMAIN = 3,
  GH_ERR_NON_CONVERGENCE = 4,
  GH_ERR_SINGULAR_INFORMATION = 5,
  GH_ERR_MISSING_CENSORING = 6,
  GH_ERR_NOT_CONVERGED = 7,
  GH_ERR_NOT_NESTED = 8,
  GH_ERR_SINGULAR_COVARIANCE = 9,
  GH_ERR_INVALID_SCENARIO = 10,
  GH_ERR_PARSE = 11,
  GH_ERR_SCHEMA = 12,
  GH_ERR_VALUE = 13,
  GH_ERR_IO = 14,
  GH_ERR_BUFFER_TOO_SMALL = 15,
  GH_ERR_INTERNAL = 16
} gh_status;

/* Design blocks. */
enum {
  GH_BLOCK_OUTCOME = 0,
  GH_BLOCK_SELECTION = 1,
  GH_BLOCK_DISPERSION = 2,
  GH_BLOCK_CORRELATION = 3
};

typedef enum gh_model_kind {
  GH_MODEL_GENERALIZED = 0,
  GH_MODEL_CLASSIC = 1
} gh_model_kind;

typedef enum gh_test_kind {
  GH_TEST_LR = 0,
  GH_TEST_WALD = 1,
  GH_TEST_GRADIENT = 2
} gh_test_kind;

typedef enum gh_cook_weight {
  GH_COOK_INFORMATION = 0, /* observed information (default) */
  GH_COOK_COVARIANCE = 1   /* inverse observed information */
} gh_cook_weight;

typedef struct gh_dataset gh_dataset;
typedef struct gh_fit gh_fit;
typedef struct gh_mc_summary gh_mc_summary;

GH_API uint32_t gh_api_version(void);
GH_API const char* gh_status_name(gh_status status);
/* Message of the last failed call on this thread ("" if none). */
GH_API const char* gh_last_error(void);

/* ---- Datasets ---------------------------------------------------------- */

typedef struct gh_dims {
  size_t n;
  size_t n_selected;
  size_t p, q, r, s;
} gh_dims;

typedef struct gh_model_config {
  const char* outcome;
  const char* selection;
  const char* const* outcome_covariates;
  size_t n_outcome_covariates;
  const char* const* selection_covariates;
  size_t n_selection_covariates;
  const char* const* dispersion_covariates;
  size_t n_dispersion_covariates;
  const char* const* correlation_covariates;
  size_t n_correlation_covariates;
  /* Non-zero prepends an intercept column to the block's design. */
  int intercepts[4];
} gh_model_config;

GH_API void gh_model_config_init(gh_model_config* config);

/* Copies the arrays. y entries where u = 0 are ignored. Design pointers may be
 * NULL when the matching column count is 0. */
GH_API gh_status gh_dataset_create(size_t n, const double* y, const int* u,
                                   const double* X, size_t p, const double* W, size_t q,
                                   const double* E, size_t r, const double* V, size_t s,
                                   gh_dataset** out);
GH_API gh_status gh_dataset_read_csv(const char* path, const gh_model_config* config,
                                     gh_dataset** out);
GH_API gh_status gh_dataset_write_csv(const gh_dataset* data, const char* path);
/* Same CSV text into buf (buffer contract as gh_dataset_column_name). */
GH_API gh_status gh_dataset_csv(const gh_dataset* data, char* buf, size_t len, size_t* needed);
/* *out = 0 when every selection column duplicates an outcome column. */
GH_API gh_status gh_dataset_exclusion_restriction(const gh_dataset* data, int* out);
GH_API void gh_dataset_destroy(gh_dataset* data);
GH_API gh_status gh_dataset_dims(const gh_dataset* data, gh_dims* dims);
/* Copies the column name (NUL-terminated) into buf when it fits; *needed
 * receives the required size including the terminator. With buf == NULL only
 * *needed is set. */
GH_API gh_status gh_dataset_column_name(const gh_dataset* data, int block, size_t col,
                                        char* buf, size_t len, size_t* needed);
/* Dataset with the dispersion and correlation designs replaced by intercepts. */
GH_API gh_status gh_dataset_classic(const gh_dataset* data, gh_dataset** out);
GH_API gh_status gh_dataset_drop_columns(const gh_dataset* data, int block, const size_t* cols,
                                         size_t k, gh_dataset** out);

/* ---- Model evaluation -------------------------------------------------- */

GH_API gh_status gh_loglik(const gh_dataset* data, const double* theta, size_t len,
                           double* out);
GH_API gh_status gh_score(const gh_dataset* data, const double* theta, size_t len,
                          double* out);

/* ---- Fitting ----------------------------------------------------------- */

typedef struct gh_fit_options {
  int max_iter;
  double grad_tol; /* <= 0 selects 1e-6 * max(1, |loglik(start)| / n) */
  double step_tol;
  const double* start; /* optional flattened starting values */
  size_t start_len;
} gh_fit_options;

GH_API void gh_fit_options_init(gh_fit_options* options);

typedef struct gh_fit_info {
  int model;            /* gh_model_kind */
  int converged;
  int status;           /* GH_OK, GH_ERR_NON_CONVERGENCE or GH_ERR_SINGULAR_INFORMATION */
  int iterations;
  double loglik;
  double grad_norm;
  double grad_tol;
  int boundary_warning; /* correlation predictor reached the tanh clamp */
  size_t n, n_selected;
  size_t p, q, r, s;
} gh_fit_info;

/* Returns GH_OK for a converged fit. GH_ERR_NON_CONVERGENCE and
 * GH_ERR_SINGULAR_INFORMATION still hand back the fit in *out so it can be
 * inspected; any other status leaves *out NULL. The classic model is fitted on
 * gh_dataset_classic(data). */
GH_API gh_status gh_fit_model(const gh_dataset* data, gh_model_kind model,
                              const gh_fit_options* options, gh_fit** out);
GH_API void gh_fit_destroy(gh_fit* fit);
GH_API gh_status gh_fit_get_info(const gh_fit* fit, gh_fit_info* info);
/* Status detail text for non-converged fits (same buffer contract as names). */
GH_API gh_status gh_fit_detail(const gh_fit* fit, char* buf, size_t len, size_t* needed);
GH_API gh_status gh_fit_estimates(const gh_fit* fit, double* out, size_t len);
GH_API gh_status gh_fit_std_errors(const gh_fit* fit, double* out, size_t len);
/* Row-major d x d covariance (inverse observed information). */
GH_API gh_status gh_fit_covariance(const gh_fit* fit, double* out, size_t len);
GH_API gh_status gh_fit_coefficient_name(const gh_fit* fit, size_t index, char* buf,
                                         size_t len, size_t* needed);

typedef struct gh_summary_row {
  int block;
  size_t column;
  double estimate;
  double std_error;
  double z_value;
  double p_value;
  double ci_low;
  double ci_high;
} gh_summary_row;

/* Fills one row per parameter; requires a converged fit. */
GH_API gh_status gh_fit_summary(const gh_fit* fit, double level, gh_summary_row* rows,
                                size_t len);

/* ---- Inference --------------------------------------------------------- */

typedef struct gh_test_result {
  int kind; /* gh_test_kind */
  double statistic;
  int df;
  double p_value;
  int numerical_warning;
} gh_test_result;

GH_API gh_status gh_lr_test(const gh_fit* full, const gh_fit* restricted, int df,
                            gh_test_result* out);
GH_API gh_status gh_wald_test(const gh_fit* fit, const size_t* indices, const double* values,
                              size_t k, gh_test_result* out);
GH_API gh_status gh_gradient_test(const gh_dataset* data, const double* theta_restricted,
                                  const double* theta_full, size_t len, int df,
                                  gh_test_result* out);
/* LR, Wald and gradient tests (in that order in results[0..2]) of the zero
 * restriction on columns `cols` of `block`. `data` must be the design the full
 * fit used (gh_dataset_classic for classic fits). *restricted_out is optional. */
GH_API gh_status gh_test_zero_restriction(const gh_dataset* data, const gh_fit* full,
                                          int block, const size_t* cols, size_t k,
                                          gh_test_result results[3],
                                          gh_fit** restricted_out);

/* ---- Diagnostics ------------------------------------------------------- */

GH_API gh_status gh_psi(double mu2, double sigma, double rho, double* out);

/* ordinary, standardized and indices have n_selected entries; all_obs has n. */
GH_API gh_status gh_score_residuals(const gh_fit* fit, const gh_dataset* data,
                                    double* ordinary, double* standardized, size_t* indices,
                                    size_t n_selected, double* all_obs, size_t n);

typedef struct gh_envelope_info {
  double level;
  int n_sim;
  int n_failed;
  double inside_fraction;
} gh_envelope_info;

/* All arrays have n entries, ordered by rank of the all-observation residual. */
GH_API gh_status gh_envelope(const gh_fit* fit, const gh_dataset* data, int n_sim, double level,
                             uint64_t seed, int threads, size_t n, double* theoretical,
                             double* observed, size_t* order, double* lower, double* upper,
                             gh_envelope_info* info);

/* rows == NULL (n_rows ignored) deletes every observation in turn; distances
 * then needs n entries, otherwise n_rows. Failed refits yield NaN. */
GH_API gh_status gh_cook_distance(const gh_fit* fit, const gh_dataset* data, int weight,
                                  const size_t* rows, size_t n_rows, int threads,
                                  double* distances, size_t len, double* threshold,
                                  int* failures);

/* ---- Simulation -------------------------------------------------------- */

GH_API gh_status gh_scenario_dataset(int scenario, size_t n, uint64_t seed, int null_kappa,
                                     gh_dataset** out);
/* Draws (y, u) at theta over the designs of `designs`. */
GH_API gh_status gh_gen_dataset(const gh_dataset* designs, const double* theta, size_t len,
                                uint64_t seed, gh_dataset** out);

typedef struct gh_mc_info {
  int scenario;
  size_t n;
  int model;
  int replicates;
  int failures;
  size_t n_parameters;
  size_t n_rejections;
} gh_mc_info;

typedef struct gh_mc_parameter {
  char name[32];
  double truth;
  double mean;
  double rmse;
} gh_mc_parameter;

typedef struct gh_mc_rejection {
  int test; /* gh_test_kind */
  double level;
  double rate;
} gh_mc_rejection;

/* levels == NULL or n_levels == 0 skips the hypothesis tests. */
GH_API gh_status gh_monte_carlo(int scenario, size_t n, int n_reps, uint64_t master_seed,
                                gh_model_kind model, int null_kappa, const double* levels,
                                size_t n_levels, int threads, gh_mc_summary** out);
GH_API void gh_mc_summary_destroy(gh_mc_summary* summary);
GH_API gh_status gh_mc_summary_info(const gh_mc_summary* summary, gh_mc_info* info);
GH_API gh_status gh_mc_summary_parameter(const gh_mc_summary* summary, size_t index,
                                         gh_mc_parameter* out);
GH_API gh_status gh_mc_summary_rejection(const gh_mc_summary* summary, size_t index,
                                         gh_mc_rejection* out);
/* table 0: parameter,true,mean,rmse; table 1: test,level,rejection_rate. */
GH_API gh_status gh_mc_summary_csv(const gh_mc_summary* summary, int table, char* buf,
                                   size_t len, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* GENHECK_GENHECK_H */
