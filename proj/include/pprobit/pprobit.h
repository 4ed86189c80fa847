/*
 * pprobit: p-generalized probit regression with coreset reduction.
 *
 * Every function that can fail returns a pprobit_status. On failure a
 * description is available from pprobit_last_error() on the same thread until
 * the next failing call. Output pointers are written only on success.
 *
 * Design matrices are row-major n x d arrays of folded rows
 * x_i = -(2 y_i - 1) z_i.
 */
#ifndef PPROBIT_PPROBIT_H
#define PPROBIT_PPROBIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PPROBIT_BUILDING_LIBRARY)
#    define PPROBIT_API __declspec(dllexport)
#  else
#    define PPROBIT_API __declspec(dllimport)
#  endif
#else
#  define PPROBIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pprobit_status {
  PPROBIT_OK = 0,
  PPROBIT_E_INVALID_ARGUMENT = 1,
  PPROBIT_E_DOMAIN = 2,
  PPROBIT_E_DIMENSION = 3,
  PPROBIT_E_IO = 4,
  PPROBIT_E_PARSE = 5,
  PPROBIT_E_RANK_DEFICIENT = 6,
  PPROBIT_E_NUMERIC = 7,
  PPROBIT_E_NO_MEMORY = 8,
  PPROBIT_E_INTERNAL = 9
} pprobit_status;

PPROBIT_API const char* pprobit_version(void);
PPROBIT_API const char* pprobit_status_string(pprobit_status status);
/* Message of the most recent failure on this thread ("" if none). */
PPROBIT_API const char* pprobit_last_error(void);

/* ---- p-generalized normal distribution and the loss g(r) = -ln(1 - cdf(r)) */

PPROBIT_API pprobit_status pprobit_pdf(double x, double p, double* out);
PPROBIT_API pprobit_status pprobit_cdf(double x, double p, double* out);
PPROBIT_API pprobit_status pprobit_log_sf(double x, double p, double* out);
PPROBIT_API pprobit_status pprobit_g(double r, double p, double* out);
PPROBIT_API pprobit_status pprobit_g_prime(double r, double p, double* out);
PPROBIT_API pprobit_status pprobit_g_second(double r, double p, double* out);

/* ---- datasets */

typedef struct pprobit_dataset pprobit_dataset;

typedef enum pprobit_format { PPROBIT_FORMAT_CSV = 0, PPROBIT_FORMAT_LIBSVM = 1 } pprobit_format;

typedef struct pprobit_load_options {
  pprobit_format format;
  int has_header;        /* CSV only */
  long label_column;     /* CSV only; negative counts from the end, -1 = last */
  size_t libsvm_dim;     /* LIBSVM feature count; 0 = largest index seen */
  int add_intercept;     /* prepend a constant 1 feature before folding */
  int scale_features;    /* divide each column by its largest absolute value */
} pprobit_load_options;

PPROBIT_API void pprobit_load_options_init(pprobit_load_options* options);

typedef struct pprobit_synthetic_spec {
  size_t n;
  size_t d;
  uint64_t seed;
  double outlier_fraction;
  double outlier_scale;
  double target_separation;
} pprobit_synthetic_spec;

PPROBIT_API void pprobit_synthetic_spec_init(pprobit_synthetic_spec* spec);

PPROBIT_API pprobit_status pprobit_dataset_load(const char* path, const pprobit_load_options* options,
                                                pprobit_dataset** out);
PPROBIT_API pprobit_status pprobit_dataset_synthesize(const pprobit_synthetic_spec* spec,
                                                      pprobit_dataset** out);
/* z is row-major n x d, labels are 0 or 1. */
PPROBIT_API pprobit_status pprobit_dataset_from_arrays(const double* z, const int* y, size_t n,
                                                       size_t d, pprobit_dataset** out);
PPROBIT_API void pprobit_dataset_free(pprobit_dataset* ds);

/* Rebuilds the folded design matrix; feature scaling is applied at most once. */
PPROBIT_API pprobit_status pprobit_dataset_prepare(pprobit_dataset* ds, int add_intercept,
                                                   int scale_features);
PPROBIT_API size_t pprobit_dataset_rows(const pprobit_dataset* ds);
/* Columns of the folded design matrix (features plus the intercept, if any). */
PPROBIT_API size_t pprobit_dataset_cols(const pprobit_dataset* ds);
/* "0/1" or "-1/+1": the label convention found in the source. */
PPROBIT_API const char* pprobit_dataset_label_mapping(const pprobit_dataset* ds);
/* Copies the folded design matrix (len >= rows * cols). */
PPROBIT_API pprobit_status pprobit_dataset_design(const pprobit_dataset* ds, double* out, size_t len);
/* Writes the raw features followed by the 0/1 label. */
PPROBIT_API pprobit_status pprobit_dataset_write_csv(const pprobit_dataset* ds, const char* path,
                                                     int header);

/* ---- objective and solver */

typedef enum pprobit_solver_method {
  PPROBIT_SOLVER_NEWTON = 0,
  PPROBIT_SOLVER_GRADIENT = 1
} pprobit_solver_method;

typedef struct pprobit_fit_options {
  pprobit_solver_method method;
  size_t max_iter;   /* 0 = default */
  double grad_tol;   /* 0 = default, 1e-8 * max(1, sum of weights) */
} pprobit_fit_options;

PPROBIT_API void pprobit_fit_options_init(pprobit_fit_options* options);

typedef struct pprobit_fit_summary {
  double loss;
  size_t iterations;
  int converged;
  double gradient_norm;
  int mle_may_not_exist;
  size_t gradient_fallbacks;
} pprobit_fit_summary;

/* Loss sum_i w_i g(x_i beta); weights may be NULL for unit weights. */
PPROBIT_API pprobit_status pprobit_loss_arrays(const double* x, const double* weights, size_t n,
                                               size_t d, double p, const double* beta, double* out);
PPROBIT_API pprobit_status pprobit_gradient_arrays(const double* x, const double* weights, size_t n,
                                                   size_t d, double p, const double* beta,
                                                   double* grad_out);
PPROBIT_API pprobit_status pprobit_fit_arrays(const double* x, const double* weights, size_t n,
                                              size_t d, double p, const pprobit_fit_options* options,
                                              double* beta_out, pprobit_fit_summary* summary);

PPROBIT_API pprobit_status pprobit_loss(const pprobit_dataset* ds, double p, const double* beta,
                                        size_t beta_len, double* out);
/* options may be NULL for defaults; beta_out needs cols(ds) entries. */
PPROBIT_API pprobit_status pprobit_fit(const pprobit_dataset* ds, double p,
                                       const pprobit_fit_options* options, double* beta_out,
                                       size_t beta_len, pprobit_fit_summary* summary);

typedef struct pprobit_mu_result {
  double mu_lower;  /* +inf when unbounded */
  size_t directions_tried;
  int unbounded;    /* some direction has no negative mass: the MLE does not exist */
} pprobit_mu_result;

/* direction_out (nullable, len cols(ds)) receives the maximizing direction. */
PPROBIT_API pprobit_status pprobit_estimate_mu(const pprobit_dataset* ds, double p,
                                               size_t num_directions, uint64_t seed,
                                               double* direction_out, size_t direction_len,
                                               pprobit_mu_result* out);

/* ---- coresets */

typedef struct pprobit_coreset pprobit_coreset;

typedef enum pprobit_method {
  PPROBIT_METHOD_PPROBIT = 0,
  PPROBIT_METHOD_UNIFORM = 1,
  PPROBIT_METHOD_L2 = 2,
  PPROBIT_METHOD_SQRT_L2 = 3,
  PPROBIT_METHOD_ONLINE_L2 = 4
} pprobit_method;

PPROBIT_API pprobit_status pprobit_method_from_string(const char* name, pprobit_method* out);
PPROBIT_API const char* pprobit_method_name(pprobit_method method);

typedef struct pprobit_coreset_options {
  pprobit_method method;
  double p;
  size_t k;
  uint64_t seed;
  int rounding;      /* power-of-two score rounding (one extra pass) */
  int use_jl;        /* Gaussian compression of R^-1 for p = 2 when ln n < d */
  unsigned threads;  /* 0 = PPROBIT_THREADS or hardware concurrency */
} pprobit_coreset_options;

PPROBIT_API void pprobit_coreset_options_init(pprobit_coreset_options* options);

typedef struct pprobit_stream_stats {
  size_t passes;
  size_t rows;
  size_t sketch_rows;
  size_t state_bytes;
  size_t budget_bytes;
  double t_sketch_ms;
  double t_sample_ms;
  int k_clamped;     /* k >= n: the coreset is the data with unit weights */
} pprobit_stream_stats;

PPROBIT_API pprobit_status pprobit_coreset_build(const pprobit_dataset* ds,
                                                 const pprobit_coreset_options* options,
                                                 pprobit_coreset** out);
/* Streams the file instead of loading it. LIBSVM input streams only when
 * libsvm_dim is set; otherwise it is loaded into memory first. */
PPROBIT_API pprobit_status pprobit_coreset_build_from_file(const char* path,
                                                           const pprobit_load_options* load,
                                                           const pprobit_coreset_options* options,
                                                           pprobit_coreset** out);
PPROBIT_API void pprobit_coreset_free(pprobit_coreset* c);

PPROBIT_API size_t pprobit_coreset_size(const pprobit_coreset* c);
PPROBIT_API size_t pprobit_coreset_cols(const pprobit_coreset* c);
PPROBIT_API double pprobit_coreset_total_score(const pprobit_coreset* c);
PPROBIT_API const char* pprobit_coreset_tag(const pprobit_coreset* c);
PPROBIT_API pprobit_status pprobit_coreset_rows(const pprobit_coreset* c, double* out, size_t len);
PPROBIT_API pprobit_status pprobit_coreset_weights(const pprobit_coreset* c, double* out, size_t len);
PPROBIT_API pprobit_status pprobit_coreset_indices(const pprobit_coreset* c, size_t* out, size_t len);
PPROBIT_API pprobit_status pprobit_coreset_stats(const pprobit_coreset* c, pprobit_stream_stats* out);
/* CSV with columns weight, x1..xd; json_path (nullable) gets the metadata. */
PPROBIT_API pprobit_status pprobit_coreset_write(const pprobit_coreset* c, const char* csv_path,
                                                 const char* json_path);
/* Weighted fit on the coreset with the p it was built for. */
PPROBIT_API pprobit_status pprobit_coreset_fit(const pprobit_coreset* c,
                                               const pprobit_fit_options* options, double* beta_out,
                                               size_t beta_len, pprobit_fit_summary* summary);

/* ---- experiments */

typedef struct pprobit_experiment_options {
  const char* dataset_name;
  const double* p_values;        /* NULL: 1, 1.5, 2, 3, 5 */
  size_t num_p;
  const pprobit_method* methods; /* NULL: all methods */
  size_t num_methods;
  const size_t* k_grid;          /* NULL: geometric from 5d to n/10 */
  size_t num_k;
  size_t trials;
  uint64_t seed;
  int rounding;
  unsigned threads;              /* 0 = PPROBIT_THREADS or hardware concurrency */
  int omit_timings;              /* leave timing fields out of the records file */
} pprobit_experiment_options;

PPROBIT_API void pprobit_experiment_options_init(pprobit_experiment_options* options);

/* Runs the sweep, writing JSON-lines records and a summary CSV (either path
 * may be NULL). summary_json (nullable) receives a JSON document with the
 * full-data fits and the summary rows; release it with pprobit_string_free. */
PPROBIT_API pprobit_status pprobit_experiment_run(const pprobit_dataset* ds,
                                                  const pprobit_experiment_options* options,
                                                  const char* records_path,
                                                  const char* summary_path, char** summary_json);
PPROBIT_API void pprobit_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PPROBIT_PPROBIT_H */
