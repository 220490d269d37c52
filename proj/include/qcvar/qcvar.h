#ifndef QCVAR_QCVAR_H
#define QCVAR_QCVAR_H

/*
 * C interface to the qcvar library.
 *
 * Matrices are passed as column-major arrays of doubles. Output buffers are
 * supplied by the caller and must hold rows*cols entries; the *_shape
 * functions report the sizes. Every function returning int returns one of the
 * QCV_* status codes; the message of the most recent failure on the calling
 * thread is available from qcv_last_error(). Indices (coefficient i, j, node
 * and interval numbers) are zero-based.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QCV_API __declspec(dllexport)
#else
#define QCV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  QCV_OK = 0,
  QCV_ERR_INPUT = 2,         /* bad arguments, data, or parameter outside its domain */
  QCV_ERR_NUMERICAL = 3,     /* numerical failure, root separation, normalization */
  QCV_ERR_TABLE_COVERAGE = 4,
  QCV_ERR_INTERNAL = 5
};

enum { QCV_DET_NONE = 0, QCV_DET_CONST = 1, QCV_DET_TREND = 2 };
enum { QCV_FAMILY_SCALAR = 0, QCV_FAMILY_SYMMETRIC = 1, QCV_FAMILY_NORMAL = 2 };
enum { QCV_REGION_LU = 0, QCV_REGION_ST = 1, QCV_REGION_NEITHER = 2 };
enum { QCV_STATUS_CONVERGED = 0, QCV_STATUS_MAX_ITER = 1, QCV_STATUS_CONSTRAINT_INFEASIBLE = 2 };

typedef struct qcv_var qcv_var;
typedef struct qcv_split qcv_split;
typedef struct qcv_dataset qcv_dataset;
typedef struct qcv_fit qcv_fit;
typedef struct qcv_table qcv_table;
typedef struct qcv_ci qcv_ci;

/* Search space for the near-unity block. */
typedef struct qcv_lambda_space {
  int family;        /* QCV_FAMILY_* */
  int q;
  double rho;
  double step;       /* eigenvalue spacing; <= 0 selects 0.005 (q = 1) or 0.01 */
  double angle_step; /* rotation-angle spacing; <= 0 selects pi/16 */
  int refine;        /* polish the best grid point */
} qcv_lambda_space;

typedef struct qcv_table_config {
  int q;
  int det;
  int steps;
  int reps;
  uint64_t seed;
  const double* levels;
  int n_levels;
} qcv_table_config;

QCV_API const char* qcv_version(void);
QCV_API const char* qcv_last_error(void);
/* Finer-grained category of the last error ("input", "separation", ...). */
QCV_API const char* qcv_last_error_kind(void);

/* ---- coefficients and spectral split ---------------------------------- */

/* stacked is p x kp: (Phi_1, ..., Phi_k). */
QCV_API int qcv_var_create(int p, int k, const double* stacked, qcv_var** out);
/* Phi with standard pair R = [[A; I], R_st], Lambda = diag(Lambda_lu, Lambda_st). */
QCV_API int qcv_var_from_parts(int p, int q, int k, const double* A, const double* lambda_lu,
                               const double* R_st, const double* lambda_st, qcv_var** out);
/* Random stable remainder around a prescribed (A, Lambda_lu). */
QCV_API int qcv_var_build(int p, int q, int k, const double* A, const double* lambda_lu,
                          uint64_t seed, qcv_var** out);
QCV_API void qcv_var_destroy(qcv_var* var);
QCV_API int qcv_var_dims(const qcv_var* var, int* p, int* k);
QCV_API int qcv_var_coefficients(const qcv_var* var, double* stacked);
QCV_API int qcv_var_companion(const qcv_var* var, double* F);

/* kp roots sorted by modulus, then real part, then sign of the imaginary part. */
QCV_API int qcv_roots(const qcv_var* var, double* re, double* im);
/* regions receives kp QCV_REGION_* codes. Fails if any root is in neither region. */
QCV_API int qcv_classify(const qcv_var* var, double rho, int* q, int* regions);

QCV_API int qcv_split_create(const qcv_var* var, int q, qcv_split** out);
QCV_API void qcv_split_destroy(qcv_split* split);
QCV_API int qcv_split_dims(const qcv_split* split, int* p, int* k, int* q);

typedef enum qcv_split_field {
  QCV_A = 0,
  QCV_LAMBDA_LU,
  QCV_LAMBDA_ST,
  QCV_R_LU,
  QCV_R_ST,
  QCV_L_LU,
  QCV_L_ST,
  QCV_BIG_R,
  QCV_BIG_L,
  QCV_BETA,
  QCV_ALPHA
} qcv_split_field;

QCV_API int qcv_split_shape(const qcv_split* split, qcv_split_field field, int* rows, int* cols);
QCV_API int qcv_split_get(const qcv_split* split, qcv_split_field field, double* out);
QCV_API int qcv_split_reconstruct(const qcv_split* split, double* F);
QCV_API int qcv_split_warning_count(const qcv_split* split);
QCV_API const char* qcv_split_warning(const qcv_split* split, int index);
/* p x p blocks; any output may be NULL. */
QCV_API int qcv_irf(const qcv_split* split, int horizon, double* value, double* lu_part,
                    double* st_part);
/* Jacobians of (vec A, vec Lambda_lu) with respect to vec(dPhi R_lu): rq x pq and q^2 x pq. */
QCV_API int qcv_jacobians(const qcv_split* split, double* J_A, double* J_lambda);

/* ---- Lambda parametrization ------------------------------------------- */

QCV_API int qcv_half_life_to_radius(double h, double* rho);
/* Returns +inf for rho = 1. */
QCV_API int qcv_radius_to_half_life(double rho, double* h);
QCV_API int qcv_lambda_materialize(int family, int q, const double* theta, int n_theta,
                                   int complex_pairs, double rho, double* lambda);

/* ---- data --------------------------------------------------------------- */

QCV_API int qcv_dataset_from_csv(const char* path, qcv_dataset** out);
QCV_API int qcv_dataset_from_matrix(int n, int p, const double* values, qcv_dataset** out);
QCV_API void qcv_dataset_destroy(qcv_dataset* ds);
QCV_API int qcv_dataset_dims(const qcv_dataset* ds, int* n, int* p);
QCV_API int qcv_dataset_values(const qcv_dataset* ds, double* values);
QCV_API const char* qcv_dataset_name(const qcv_dataset* ds, int column);
QCV_API int qcv_dataset_notice_count(const qcv_dataset* ds);
QCV_API const char* qcv_dataset_notice(const qcv_dataset* ds, int index);

/* ---- estimation --------------------------------------------------------- */

QCV_API int qcv_fit_ols(const qcv_dataset* ds, int k, int det, qcv_fit** out);
QCV_API int qcv_fit_restricted(const qcv_dataset* ds, int k, int det, int q, const double* A,
                               const double* lambda0, qcv_fit** out);
/* init may be NULL. */
QCV_API int qcv_fit_profile(const qcv_dataset* ds, int k, int det, int q, const double* lambda0,
                            const double* init, qcv_fit** out);
QCV_API int qcv_fit_rrr(const qcv_dataset* ds, int k, int det, int q, double lambda0,
                        qcv_fit** out);
/* Best point over the Lambda space; the evaluation trace is kept on the fit. */
QCV_API int qcv_fit_profile_lambda(const qcv_dataset* ds, int k, int det,
                                   const qcv_lambda_space* space, qcv_fit** out);
QCV_API void qcv_fit_destroy(qcv_fit* fit);

QCV_API int qcv_fit_dims(const qcv_fit* fit, int* p, int* k, int* q, int* d, int* nobs);
QCV_API double qcv_fit_loglik(const qcv_fit* fit);
QCV_API int qcv_fit_status(const qcv_fit* fit);
QCV_API double qcv_fit_constraint_residual(const qcv_fit* fit);
QCV_API int qcv_fit_evaluations(const qcv_fit* fit);
QCV_API int qcv_fit_phi(const qcv_fit* fit, double* stacked);
QCV_API int qcv_fit_sigma(const qcv_fit* fit, double* sigma);
/* p x d: intercept then trend, as the deterministic case includes them. */
QCV_API int qcv_fit_det_coeffs(const qcv_fit* fit, double* coeffs);
/* Restricted fits only: A (r x q) and Lambda0 (q x q). */
QCV_API int qcv_fit_A(const qcv_fit* fit, double* A);
QCV_API int qcv_fit_lambda(const qcv_fit* fit, double* lambda);
/* Split of the estimate at its q; fails if the estimate does not split. */
QCV_API int qcv_fit_split(const qcv_fit* fit, int q, qcv_split** out);
QCV_API int qcv_fit_warning_count(const qcv_fit* fit);
QCV_API const char* qcv_fit_warning(const qcv_fit* fit, int index);
/* Trace of a Lambda-space fit. */
QCV_API int qcv_fit_trace_count(const qcv_fit* fit);
QCV_API int qcv_fit_trace_point(const qcv_fit* fit, int index, double* lambda, double* loglik,
                                int* ok);

/* Concentrated loglikelihood of given coefficients and covariance. */
QCV_API int qcv_concentrated_loglik(const qcv_var* var, const double* sigma, const qcv_dataset* ds,
                                    int det, double* value);

/* ---- likelihood ratios -------------------------------------------------- */

QCV_API int qcv_lr_lambda(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                          const double* lambda0, double* value);
QCV_API int qcv_lr_coefficient(const qcv_dataset* ds, int k, int det, int q,
                               const double* lambda0, int i, int j, double a0, double* value);
QCV_API int qcv_chi2_quantile(double level, double df, double* value);

/* ---- limit distribution tables ----------------------------------------- */

QCV_API int qcv_limit_statistic(const qcv_table_config* config, const double* C_star,
                                uint64_t rep, double* value);
QCV_API int qcv_c_star(int q, const double* C, const double* Delta, double* out);
/* grid holds n_grid q x q matrices back to back. path may be NULL. */
QCV_API int qcv_table_build(const qcv_table_config* config, const double* grid, int n_grid,
                            const char* path, qcv_table** out);
QCV_API int qcv_table_read(const char* path, qcv_table** out);
QCV_API int qcv_table_write(const qcv_table* table, const char* path);
QCV_API void qcv_table_destroy(qcv_table* table);
QCV_API int qcv_table_info(const qcv_table* table, int* q, int* det, int* steps, int* reps,
                           uint64_t* seed, int* n_levels, int* n_rows);
QCV_API int qcv_table_levels(const qcv_table* table, double* levels);
QCV_API int qcv_table_row(const qcv_table* table, int index, double* C, double* quantiles,
                          double* se);
/* exact and distance may be NULL. */
QCV_API int qcv_table_lookup(const qcv_table* table, const double* C, double level, double* value,
                             int* exact, double* distance);

/* ---- confidence sets ---------------------------------------------------- */

QCV_API int qcv_ci_lambda(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                          double alpha1, const qcv_table* table, qcv_ci** out);
QCV_API int qcv_ci_coefficient(const qcv_dataset* ds, int k, int det, int q,
                               const double* lambda0, int i, int j, double alpha2, qcv_ci** out);
QCV_API int qcv_ci_bonferroni(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                              double alpha1, double alpha2, int i, int j, const qcv_table* table,
                              qcv_ci** out);
QCV_API void qcv_ci_destroy(qcv_ci* ci);

QCV_API double qcv_ci_level(const qcv_ci* ci);
/* Coefficient sets: the estimate the interval is centred on. */
QCV_API double qcv_ci_center(const qcv_ci* ci);
QCV_API int qcv_ci_interval_count(const qcv_ci* ci);
QCV_API int qcv_ci_interval(const qcv_ci* ci, int index, double* lo, double* hi, int* lo_unbounded,
                            int* hi_unbounded);
QCV_API int qcv_ci_hull(const qcv_ci* ci, double* lo, double* hi, int* lo_unbounded,
                        int* hi_unbounded);
/* Bonferroni sets: 1 when the Lambda set was empty and the argmax was used. */
QCV_API int qcv_ci_fallback(const qcv_ci* ci);
/* Lambda grid nodes (Lambda and Bonferroni sets). */
QCV_API int qcv_ci_node_count(const qcv_ci* ci);
QCV_API int qcv_ci_node(const qcv_ci* ci, int index, double* lambda, double* lr, double* critical,
                        int* accepted, int* ok);
/* Conditional intervals of a Bonferroni set, one per accepted Lambda. */
QCV_API int qcv_ci_conditional_count(const qcv_ci* ci);
QCV_API int qcv_ci_conditional(const qcv_ci* ci, int index, double* lambda, double* lo,
                               double* hi, int* unbounded);
QCV_API int qcv_ci_warning_count(const qcv_ci* ci);
QCV_API const char* qcv_ci_warning(const qcv_ci* ci, int index);

/* ---- simulation --------------------------------------------------------- */

/* y and eps are n x p (either may be NULL). */
QCV_API int qcv_simulate(const qcv_var* var, const double* sigma, const double* mu,
                         const double* delta, int n, uint64_t seed, int zero_noise, double* y,
                         double* eps);

#ifdef __cplusplus
}
#endif

#endif /* QCVAR_QCVAR_H */
