#include "qcvar/qcvar.h"

#include "qcvar/dataset.hpp"
#include "qcvar/dgp.hpp"
#include "qcvar/error.hpp"
#include "qcvar/inference.hpp"
#include "qcvar/likelihood.hpp"
#include "qcvar/limitdist.hpp"
#include "qcvar/representation.hpp"
#include "qcvar/spectral.hpp"
#include "qcvar/version.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

struct qcv_var {
  qcvar::VarCoefficients coeffs;
};

struct qcv_split {
  qcvar::SpectralSplit split;
  qcvar::Matrix alpha;
};

struct qcv_dataset {
  qcvar::Dataset data;
};

struct qcv_fit {
  qcvar::FitResult fit;
  std::vector<qcvar::GridEvaluation> trace;
};

struct qcv_table {
  qcvar::QuantileTable table;
};

struct qcv_ci {
  enum class Kind { lambda, coefficient, bonferroni } kind;
  qcvar::LambdaConfidenceSet lambda_set;
  qcvar::CoefficientConfidenceSet coef_set;
  qcvar::BonferroniSet bonf_set;
};

namespace {

using qcvar::ErrorKind;
using qcvar::Matrix;

thread_local std::string last_error;
thread_local std::string last_kind = "none";

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input:
    case ErrorKind::domain:
    case ErrorKind::classification:
      return QCV_ERR_INPUT;
    case ErrorKind::numerical:
    case ErrorKind::separation:
    case ErrorKind::normalization:
    case ErrorKind::construction:
      return QCV_ERR_NUMERICAL;
    case ErrorKind::table_coverage:
      return QCV_ERR_TABLE_COVERAGE;
    case ErrorKind::io:
    case ErrorKind::internal:
      return QCV_ERR_INTERNAL;
  }
  return QCV_ERR_INTERNAL;
}

template <class F>
int guard(F&& body) {
  try {
    body();
    last_error.clear();
    last_kind = "none";
    return QCV_OK;
  } catch (const qcvar::Error& e) {
    last_error = e.what();
    last_kind = qcvar::to_string(e.kind());
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    last_kind = "internal";
    return QCV_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    last_kind = "internal";
    return QCV_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    last_kind = "internal";
    return QCV_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw qcvar::Error(ErrorKind::input, what);
}

template <class T>
void need(const T* p, const char* name) {
  if (p == nullptr) throw qcvar::Error(ErrorKind::input, std::string(name) + " is null");
}

Matrix read(const double* src, int rows, int cols) {
  if (rows * cols == 0) return Matrix(rows, cols);
  need(src, "matrix argument");
  return Eigen::Map<const Matrix>(src, rows, cols);
}

void write(const Matrix& m, double* dst) {
  if (dst == nullptr || m.size() == 0) return;
  Eigen::Map<Matrix>(dst, m.rows(), m.cols()) = m;
}

qcvar::DetCase det_case(int det) {
  switch (det) {
    case QCV_DET_NONE: return qcvar::DetCase::none;
    case QCV_DET_CONST: return qcvar::DetCase::constant;
    case QCV_DET_TREND: return qcvar::DetCase::trend;
    default: throw qcvar::Error(ErrorKind::input, "unknown deterministic case " + std::to_string(det));
  }
}

int det_code(qcvar::DetCase det) {
  switch (det) {
    case qcvar::DetCase::none: return QCV_DET_NONE;
    case qcvar::DetCase::constant: return QCV_DET_CONST;
    case qcvar::DetCase::trend: return QCV_DET_TREND;
  }
  return QCV_DET_NONE;
}

qcvar::LambdaFamily family_of(int family) {
  switch (family) {
    case QCV_FAMILY_SCALAR: return qcvar::LambdaFamily::scalar;
    case QCV_FAMILY_SYMMETRIC: return qcvar::LambdaFamily::symmetric;
    case QCV_FAMILY_NORMAL: return qcvar::LambdaFamily::normal;
    default: throw qcvar::Error(ErrorKind::input, "unknown Lambda family " + std::to_string(family));
  }
}

qcvar::LambdaGrid grid_of(const qcv_lambda_space* space) {
  need(space, "lambda space");
  require(space->q >= 1, "lambda space needs q >= 1");
  qcvar::LambdaGrid grid;
  grid.family = family_of(space->family);
  grid.q = space->q;
  grid.rho = space->rho;
  grid.step = space->step > 0.0 ? space->step : (space->q == 1 ? 0.005 : 0.01);
  if (space->angle_step > 0.0) grid.angle_step = space->angle_step;
  grid.refine = space->refine != 0;
  return grid;
}

qcvar::RegressionProblem problem_of(const qcv_dataset* ds, int k, int det) {
  need(ds, "dataset");
  require(k >= 1, "lag order must be at least 1");
  return qcvar::RegressionProblem(ds->data.values, k, det_case(det));
}

qcvar::LimitDistConfig config_of(const qcv_table_config* config) {
  need(config, "table config");
  qcvar::LimitDistConfig c;
  c.q = config->q;
  c.det = det_case(config->det);
  c.steps = config->steps;
  c.reps = config->reps;
  c.seed = config->seed;
  if (config->levels != nullptr && config->n_levels > 0)
    c.levels.assign(config->levels, config->levels + config->n_levels);
  c.C_star = Matrix::Zero(std::max(c.q, 1), std::max(c.q, 1));
  return c;
}

const Matrix& split_field(const qcv_split* s, qcv_split_field field, Matrix& scratch) {
  const auto& sp = s->split;
  switch (field) {
    case QCV_A: return sp.A;
    case QCV_LAMBDA_LU: return sp.lambda_lu;
    case QCV_LAMBDA_ST: return sp.lambda_st;
    case QCV_R_LU: return sp.R_lu;
    case QCV_R_ST: return sp.R_st;
    case QCV_L_LU: return sp.L_lu;
    case QCV_L_ST: return sp.L_st;
    case QCV_BIG_R: return sp.big_R;
    case QCV_BIG_L: return sp.big_L;
    case QCV_BETA:
      scratch = qcvar::qcs_basis(sp);
      return scratch;
    case QCV_ALPHA: return s->alpha;
  }
  throw qcvar::Error(ErrorKind::input, "unknown split field");
}

const char* string_at(const std::vector<std::string>& v, int index) {
  if (index < 0 || index >= static_cast<int>(v.size())) return nullptr;
  return v[static_cast<std::size_t>(index)].c_str();
}

qcv_split* make_split(qcvar::SpectralSplit sp, const qcvar::VarCoefficients& coeffs) {
  auto out = std::make_unique<qcv_split>();
  Matrix alpha;
  if (sp.r() > 0) alpha = qcvar::adjustment_alpha(coeffs, qcvar::qcs_basis(sp));
  out->split = std::move(sp);
  out->alpha = std::move(alpha);
  return out.release();
}

const std::vector<qcvar::Interval>& intervals_of(const qcv_ci* ci) {
  switch (ci->kind) {
    case qcv_ci::Kind::lambda: return ci->lambda_set.intervals;
    case qcv_ci::Kind::coefficient: return ci->coef_set.intervals;
    case qcv_ci::Kind::bonferroni: return ci->bonf_set.intervals;
  }
  return ci->coef_set.intervals;
}

const qcvar::LambdaConfidenceSet* lambda_set_of(const qcv_ci* ci) {
  if (ci->kind == qcv_ci::Kind::lambda) return &ci->lambda_set;
  if (ci->kind == qcv_ci::Kind::bonferroni) return &ci->bonf_set.lambda_set;
  return nullptr;
}

}  // namespace

extern "C" {

const char* qcv_version(void) { return qcvar::kVersion; }
const char* qcv_last_error(void) { return last_error.c_str(); }
const char* qcv_last_error_kind(void) { return last_kind.c_str(); }

// ---- coefficients and split

int qcv_var_create(int p, int k, const double* stacked, qcv_var** out) {
  return guard([&] {
    need(out, "out");
    require(p >= 1 && k >= 1, "p and k must be positive");
    *out = new qcv_var{qcvar::VarCoefficients(read(stacked, p, k * p), k)};
  });
}

int qcv_var_from_parts(int p, int q, int k, const double* A, const double* lambda_lu,
                       const double* R_st, const double* lambda_st, qcv_var** out) {
  return guard([&] {
    need(out, "out");
    require(p >= 1 && k >= 1 && q >= 0 && q <= p, "invalid dimensions");
    const int m = k * p - q;
    auto coeffs = qcvar::build_var_from_parts(read(A, p - q, q), read(lambda_lu, q, q),
                                              read(R_st, p, m), read(lambda_st, m, m), k);
    *out = new qcv_var{std::move(coeffs)};
  });
}

int qcv_var_build(int p, int q, int k, const double* A, const double* lambda_lu, uint64_t seed,
                  qcv_var** out) {
  return guard([&] {
    need(out, "out");
    require(p >= 1 && k >= 1 && q >= 0 && q <= p, "invalid dimensions");
    auto coeffs = qcvar::build_var(read(A, p - q, q), read(lambda_lu, q, q), seed, k);
    *out = new qcv_var{std::move(coeffs)};
  });
}

void qcv_var_destroy(qcv_var* var) { delete var; }

int qcv_var_dims(const qcv_var* var, int* p, int* k) {
  return guard([&] {
    need(var, "var");
    if (p) *p = var->coeffs.p();
    if (k) *k = var->coeffs.k();
  });
}

int qcv_var_coefficients(const qcv_var* var, double* stacked) {
  return guard([&] {
    need(var, "var");
    write(var->coeffs.stacked(), stacked);
  });
}

int qcv_var_companion(const qcv_var* var, double* F) {
  return guard([&] {
    need(var, "var");
    write(qcvar::companion(var->coeffs), F);
  });
}

int qcv_roots(const qcv_var* var, double* re, double* im) {
  return guard([&] {
    need(var, "var");
    const auto rs = qcvar::roots(var->coeffs);
    for (std::size_t i = 0; i < rs.roots.size(); ++i) {
      if (re) re[i] = rs.roots[i].real();
      if (im) im[i] = rs.roots[i].imag();
    }
  });
}

int qcv_classify(const qcv_var* var, double rho, int* q, int* regions) {
  return guard([&] {
    need(var, "var");
    const auto c = qcvar::classify(qcvar::roots(var->coeffs), qcvar::RegionSpec(rho));
    if (q) *q = c.q;
    if (regions) {
      for (std::size_t i = 0; i < c.regions.size(); ++i) {
        regions[i] = c.regions[i] == qcvar::RootRegion::lu   ? QCV_REGION_LU
                     : c.regions[i] == qcvar::RootRegion::st ? QCV_REGION_ST
                                                             : QCV_REGION_NEITHER;
      }
    }
  });
}

int qcv_split_create(const qcv_var* var, int q, qcv_split** out) {
  return guard([&] {
    need(var, "var");
    need(out, "out");
    *out = make_split(qcvar::split(var->coeffs, q), var->coeffs);
  });
}

void qcv_split_destroy(qcv_split* split) { delete split; }

int qcv_split_dims(const qcv_split* split, int* p, int* k, int* q) {
  return guard([&] {
    need(split, "split");
    if (p) *p = split->split.p;
    if (k) *k = split->split.k;
    if (q) *q = split->split.q;
  });
}

int qcv_split_shape(const qcv_split* split, qcv_split_field field, int* rows, int* cols) {
  return guard([&] {
    need(split, "split");
    Matrix scratch;
    const Matrix& m = split_field(split, field, scratch);
    if (rows) *rows = static_cast<int>(m.rows());
    if (cols) *cols = static_cast<int>(m.cols());
  });
}

int qcv_split_get(const qcv_split* split, qcv_split_field field, double* out) {
  return guard([&] {
    need(split, "split");
    need(out, "out");
    Matrix scratch;
    write(split_field(split, field, scratch), out);
  });
}

int qcv_split_reconstruct(const qcv_split* split, double* F) {
  return guard([&] {
    need(split, "split");
    write(qcvar::reconstruct(split->split), F);
  });
}

int qcv_split_warning_count(const qcv_split* split) {
  return split ? static_cast<int>(split->split.warnings.size()) : 0;
}

const char* qcv_split_warning(const qcv_split* split, int index) {
  return split ? string_at(split->split.warnings, index) : nullptr;
}

int qcv_irf(const qcv_split* split, int horizon, double* value, double* lu_part, double* st_part) {
  return guard([&] {
    need(split, "split");
    require(horizon >= 0, "horizon must be nonnegative");
    const auto r = qcvar::irf(split->split, horizon);
    write(r.value, value);
    write(r.lu_part, lu_part);
    write(r.st_part, st_part);
  });
}

int qcv_jacobians(const qcv_split* split, double* J_A, double* J_lambda) {
  return guard([&] {
    need(split, "split");
    const auto j = qcvar::jacobians(split->split);
    write(j.J_A, J_A);
    write(j.J_lambda, J_lambda);
  });
}

// ---- Lambda parametrization

int qcv_half_life_to_radius(double h, double* rho) {
  return guard([&] {
    need(rho, "rho");
    *rho = qcvar::half_life_to_radius(h);
  });
}

int qcv_radius_to_half_life(double rho, double* h) {
  return guard([&] {
    need(h, "h");
    *h = qcvar::radius_to_half_life(rho);
  });
}

int qcv_lambda_materialize(int family, int q, const double* theta, int n_theta, int complex_pairs,
                           double rho, double* lambda) {
  return guard([&] {
    need(lambda, "lambda");
    require(n_theta >= 0 && (n_theta == 0 || theta != nullptr), "theta is null");
    qcvar::LambdaParam param;
    param.family = family_of(family);
    param.q = q;
    param.theta.assign(theta, theta + n_theta);
    param.complex_pairs = complex_pairs;
    write(qcvar::lambda_materialize(param, rho), lambda);
  });
}

// ---- data

int qcv_dataset_from_csv(const char* path, qcv_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new qcv_dataset{qcvar::ingest_csv(path)};
  });
}

int qcv_dataset_from_matrix(int n, int p, const double* values, qcv_dataset** out) {
  return guard([&] {
    need(out, "out");
    require(n >= 1 && p >= 1, "dataset must be nonempty");
    qcvar::Dataset d;
    d.values = read(values, n, p);
    for (int j = 0; j < p; ++j) d.names.push_back("y" + std::to_string(j + 1));
    d.source = "<matrix>";
    *out = new qcv_dataset{std::move(d)};
  });
}

void qcv_dataset_destroy(qcv_dataset* ds) { delete ds; }

int qcv_dataset_dims(const qcv_dataset* ds, int* n, int* p) {
  return guard([&] {
    need(ds, "dataset");
    if (n) *n = static_cast<int>(ds->data.values.rows());
    if (p) *p = static_cast<int>(ds->data.values.cols());
  });
}

int qcv_dataset_values(const qcv_dataset* ds, double* values) {
  return guard([&] {
    need(ds, "dataset");
    write(ds->data.values, values);
  });
}

const char* qcv_dataset_name(const qcv_dataset* ds, int column) {
  return ds ? string_at(ds->data.names, column) : nullptr;
}

int qcv_dataset_notice_count(const qcv_dataset* ds) {
  return ds ? static_cast<int>(ds->data.notices.size()) : 0;
}

const char* qcv_dataset_notice(const qcv_dataset* ds, int index) {
  return ds ? string_at(ds->data.notices, index) : nullptr;
}

// ---- estimation

int qcv_fit_ols(const qcv_dataset* ds, int k, int det, qcv_fit** out) {
  return guard([&] {
    need(out, "out");
    const auto problem = problem_of(ds, k, det);
    *out = new qcv_fit{qcvar::ols_fit(problem), {}};
  });
}

int qcv_fit_restricted(const qcv_dataset* ds, int k, int det, int q, const double* A,
                       const double* lambda0, qcv_fit** out) {
  return guard([&] {
    need(out, "out");
    const auto problem = problem_of(ds, k, det);
    require(q >= 0 && q <= problem.p, "q must lie in [0, p]");
    *out = new qcv_fit{
        qcvar::restricted_fit(problem, read(A, problem.p - q, q), read(lambda0, q, q)), {}};
  });
}

int qcv_fit_profile(const qcv_dataset* ds, int k, int det, int q, const double* lambda0,
                    const double* init, qcv_fit** out) {
  return guard([&] {
    need(out, "out");
    const auto problem = problem_of(ds, k, det);
    require(q >= 0 && q <= problem.p, "q must lie in [0, p]");
    qcvar::ProfileOptions options;
    if (init != nullptr) options.init = read(init, problem.p - q, q);
    *out = new qcv_fit{qcvar::profile_A(problem, read(lambda0, q, q), options), {}};
  });
}

int qcv_fit_rrr(const qcv_dataset* ds, int k, int det, int q, double lambda0, qcv_fit** out) {
  return guard([&] {
    need(out, "out");
    const auto problem = problem_of(ds, k, det);
    *out = new qcv_fit{qcvar::rrr_fit(problem, lambda0, q), {}};
  });
}

int qcv_fit_profile_lambda(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                           qcv_fit** out) {
  return guard([&] {
    need(out, "out");
    const auto problem = problem_of(ds, k, det);
    auto result = qcvar::profile_lambda(problem, grid_of(space));
    *out = new qcv_fit{std::move(result.best), std::move(result.trace)};
  });
}

void qcv_fit_destroy(qcv_fit* fit) { delete fit; }

int qcv_fit_dims(const qcv_fit* fit, int* p, int* k, int* q, int* d, int* nobs) {
  return guard([&] {
    need(fit, "fit");
    const auto& f = fit->fit;
    if (p) *p = static_cast<int>(f.phi.rows());
    if (k) *k = f.k;
    if (q) *q = static_cast<int>(f.lambda0.rows());
    if (d) *d = qcvar::det_columns(f.det);
    if (nobs) *nobs = f.nobs;
  });
}

double qcv_fit_loglik(const qcv_fit* fit) {
  return fit ? fit->fit.loglik : std::numeric_limits<double>::quiet_NaN();
}

int qcv_fit_status(const qcv_fit* fit) {
  if (!fit) return -1;
  switch (fit->fit.status) {
    case qcvar::FitStatus::converged: return QCV_STATUS_CONVERGED;
    case qcvar::FitStatus::max_iter: return QCV_STATUS_MAX_ITER;
    case qcvar::FitStatus::constraint_infeasible: return QCV_STATUS_CONSTRAINT_INFEASIBLE;
  }
  return -1;
}

double qcv_fit_constraint_residual(const qcv_fit* fit) {
  return fit ? fit->fit.constraint_residual : std::numeric_limits<double>::quiet_NaN();
}

int qcv_fit_evaluations(const qcv_fit* fit) { return fit ? fit->fit.evaluations : 0; }

int qcv_fit_phi(const qcv_fit* fit, double* stacked) {
  return guard([&] {
    need(fit, "fit");
    write(fit->fit.phi, stacked);
  });
}

int qcv_fit_sigma(const qcv_fit* fit, double* sigma) {
  return guard([&] {
    need(fit, "fit");
    write(fit->fit.sigma_hat, sigma);
  });
}

int qcv_fit_det_coeffs(const qcv_fit* fit, double* coeffs) {
  return guard([&] {
    need(fit, "fit");
    write(fit->fit.det_coeffs, coeffs);
  });
}

int qcv_fit_A(const qcv_fit* fit, double* A) {
  return guard([&] {
    need(fit, "fit");
    require(fit->fit.lambda0.size() > 0, "not a restricted fit");
    write(fit->fit.A, A);
  });
}

int qcv_fit_lambda(const qcv_fit* fit, double* lambda) {
  return guard([&] {
    need(fit, "fit");
    require(fit->fit.lambda0.size() > 0, "not a restricted fit");
    write(fit->fit.lambda0, lambda);
  });
}

int qcv_fit_split(const qcv_fit* fit, int q, qcv_split** out) {
  return guard([&] {
    need(fit, "fit");
    need(out, "out");
    const auto coeffs = fit->fit.coeffs();
    *out = make_split(qcvar::split(coeffs, q), coeffs);
  });
}

int qcv_fit_warning_count(const qcv_fit* fit) {
  return fit ? static_cast<int>(fit->fit.warnings.size()) : 0;
}

const char* qcv_fit_warning(const qcv_fit* fit, int index) {
  return fit ? string_at(fit->fit.warnings, index) : nullptr;
}

int qcv_fit_trace_count(const qcv_fit* fit) {
  return fit ? static_cast<int>(fit->trace.size()) : 0;
}

int qcv_fit_trace_point(const qcv_fit* fit, int index, double* lambda, double* loglik, int* ok) {
  return guard([&] {
    need(fit, "fit");
    require(index >= 0 && index < static_cast<int>(fit->trace.size()), "trace index out of range");
    const auto& e = fit->trace[static_cast<std::size_t>(index)];
    write(e.lambda, lambda);
    if (loglik) *loglik = e.loglik;
    if (ok) *ok = e.ok ? 1 : 0;
  });
}

int qcv_concentrated_loglik(const qcv_var* var, const double* sigma, const qcv_dataset* ds,
                            int det, double* value) {
  return guard([&] {
    need(var, "var");
    need(ds, "dataset");
    need(value, "value");
    const int p = var->coeffs.p();
    *value = qcvar::concentrated_loglik(var->coeffs, read(sigma, p, p), ds->data.values,
                                        det_case(det));
  });
}

// ---- likelihood ratios

int qcv_lr_lambda(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                  const double* lambda0, double* value) {
  return guard([&] {
    need(value, "value");
    const auto problem = problem_of(ds, k, det);
    const auto grid = grid_of(space);
    *value = qcvar::lr_lambda(problem, read(lambda0, grid.q, grid.q), grid).value;
  });
}

int qcv_lr_coefficient(const qcv_dataset* ds, int k, int det, int q, const double* lambda0, int i,
                       int j, double a0, double* value) {
  return guard([&] {
    need(value, "value");
    const auto problem = problem_of(ds, k, det);
    require(q >= 1 && q < problem.p, "coefficient tests need 1 <= q < p");
    *value = qcvar::lr_coefficient(problem, a0, i, j, read(lambda0, q, q)).value;
  });
}

int qcv_chi2_quantile(double level, double df, double* value) {
  return guard([&] {
    need(value, "value");
    *value = qcvar::chi2_quantile(level, df);
  });
}

// ---- tables

int qcv_limit_statistic(const qcv_table_config* config, const double* C_star, uint64_t rep,
                        double* value) {
  return guard([&] {
    need(value, "value");
    auto c = config_of(config);
    c.C_star = read(C_star, c.q, c.q);
    *value = qcvar::simulate_statistic(c, rep);
  });
}

int qcv_c_star(int q, const double* C, const double* Delta, double* out) {
  return guard([&] {
    need(out, "out");
    require(q >= 1, "q must be positive");
    write(qcvar::c_star(read(C, q, q), read(Delta, q, q)), out);
  });
}

int qcv_table_build(const qcv_table_config* config, const double* grid, int n_grid,
                    const char* path, qcv_table** out) {
  return guard([&] {
    need(out, "out");
    auto c = config_of(config);
    require(n_grid >= 1, "grid must be nonempty");
    need(grid, "grid");
    std::vector<Matrix> nodes;
    const int qq = c.q * c.q;
    for (int g = 0; g < n_grid; ++g) nodes.push_back(read(grid + g * qq, c.q, c.q));
    std::optional<std::string> file;
    if (path != nullptr) file = path;
    *out = new qcv_table{qcvar::build_table(nodes, c, file)};
  });
}

int qcv_table_read(const char* path, qcv_table** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new qcv_table{qcvar::read_table(path)};
  });
}

int qcv_table_write(const qcv_table* table, const char* path) {
  return guard([&] {
    need(table, "table");
    need(path, "path");
    qcvar::write_table(table->table, path);
  });
}

void qcv_table_destroy(qcv_table* table) { delete table; }

int qcv_table_info(const qcv_table* table, int* q, int* det, int* steps, int* reps,
                   uint64_t* seed, int* n_levels, int* n_rows) {
  return guard([&] {
    need(table, "table");
    const auto& t = table->table;
    if (q) *q = t.q;
    if (det) *det = det_code(t.det);
    if (steps) *steps = t.steps;
    if (reps) *reps = t.reps;
    if (seed) *seed = t.seed;
    if (n_levels) *n_levels = static_cast<int>(t.levels.size());
    if (n_rows) *n_rows = static_cast<int>(t.rows.size());
  });
}

int qcv_table_levels(const qcv_table* table, double* levels) {
  return guard([&] {
    need(table, "table");
    need(levels, "levels");
    for (std::size_t i = 0; i < table->table.levels.size(); ++i) levels[i] = table->table.levels[i];
  });
}

int qcv_table_row(const qcv_table* table, int index, double* C, double* quantiles, double* se) {
  return guard([&] {
    need(table, "table");
    const auto& rows = table->table.rows;
    require(index >= 0 && index < static_cast<int>(rows.size()), "row index out of range");
    const auto& row = rows[static_cast<std::size_t>(index)];
    write(row.C, C);
    for (std::size_t i = 0; i < row.quantiles.size(); ++i) {
      if (quantiles) quantiles[i] = row.quantiles[i];
      if (se) se[i] = row.se[i];
    }
  });
}

int qcv_table_lookup(const qcv_table* table, const double* C, double level, double* value,
                     int* exact, double* distance) {
  return guard([&] {
    need(table, "table");
    need(value, "value");
    const int q = table->table.q;
    const auto r = qcvar::lookup(table->table, read(C, q, q), level);
    *value = r.value;
    if (exact) *exact = r.exact ? 1 : 0;
    if (distance) *distance = r.distance;
  });
}

// ---- confidence sets

int qcv_ci_lambda(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                  double alpha1, const qcv_table* table, qcv_ci** out) {
  return guard([&] {
    need(out, "out");
    need(table, "table");
    const auto problem = problem_of(ds, k, det);
    auto ci = std::make_unique<qcv_ci>();
    ci->kind = qcv_ci::Kind::lambda;
    ci->lambda_set = qcvar::ci_lambda(problem, alpha1, grid_of(space), table->table);
    *out = ci.release();
  });
}

int qcv_ci_coefficient(const qcv_dataset* ds, int k, int det, int q, const double* lambda0, int i,
                       int j, double alpha2, qcv_ci** out) {
  return guard([&] {
    need(out, "out");
    const auto problem = problem_of(ds, k, det);
    require(q >= 1 && q < problem.p, "coefficient sets need 1 <= q < p");
    auto ci = std::make_unique<qcv_ci>();
    ci->kind = qcv_ci::Kind::coefficient;
    ci->coef_set =
        qcvar::ci_coefficient_given_lambda(problem, alpha2, i, j, read(lambda0, q, q));
    *out = ci.release();
  });
}

int qcv_ci_bonferroni(const qcv_dataset* ds, int k, int det, const qcv_lambda_space* space,
                      double alpha1, double alpha2, int i, int j, const qcv_table* table,
                      qcv_ci** out) {
  return guard([&] {
    need(out, "out");
    need(table, "table");
    const auto problem = problem_of(ds, k, det);
    auto ci = std::make_unique<qcv_ci>();
    ci->kind = qcv_ci::Kind::bonferroni;
    ci->bonf_set =
        qcvar::bonferroni_ci(problem, alpha1, alpha2, i, j, grid_of(space), table->table);
    *out = ci.release();
  });
}

void qcv_ci_destroy(qcv_ci* ci) { delete ci; }

double qcv_ci_level(const qcv_ci* ci) {
  if (!ci) return std::numeric_limits<double>::quiet_NaN();
  switch (ci->kind) {
    case qcv_ci::Kind::lambda: return ci->lambda_set.level;
    case qcv_ci::Kind::coefficient: return ci->coef_set.level;
    case qcv_ci::Kind::bonferroni: return 1.0 - ci->bonf_set.alpha1 - ci->bonf_set.alpha2;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double qcv_ci_center(const qcv_ci* ci) {
  if (!ci || ci->kind != qcv_ci::Kind::coefficient) return std::numeric_limits<double>::quiet_NaN();
  return ci->coef_set.center;
}

int qcv_ci_interval_count(const qcv_ci* ci) {
  return ci ? static_cast<int>(intervals_of(ci).size()) : 0;
}

int qcv_ci_interval(const qcv_ci* ci, int index, double* lo, double* hi, int* lo_unbounded,
                    int* hi_unbounded) {
  return guard([&] {
    need(ci, "ci");
    const auto& v = intervals_of(ci);
    require(index >= 0 && index < static_cast<int>(v.size()), "interval index out of range");
    const auto& iv = v[static_cast<std::size_t>(index)];
    if (lo) *lo = iv.lo;
    if (hi) *hi = iv.hi;
    if (lo_unbounded) *lo_unbounded = iv.lo_unbounded ? 1 : 0;
    if (hi_unbounded) *hi_unbounded = iv.hi_unbounded ? 1 : 0;
  });
}

int qcv_ci_hull(const qcv_ci* ci, double* lo, double* hi, int* lo_unbounded, int* hi_unbounded) {
  return guard([&] {
    need(ci, "ci");
    const auto& v = intervals_of(ci);
    require(!v.empty(), "the set is empty");
    const auto h = qcvar::hull(v);
    if (lo) *lo = h.lo;
    if (hi) *hi = h.hi;
    if (lo_unbounded) *lo_unbounded = h.lo_unbounded ? 1 : 0;
    if (hi_unbounded) *hi_unbounded = h.hi_unbounded ? 1 : 0;
  });
}

int qcv_ci_fallback(const qcv_ci* ci) {
  return ci && ci->kind == qcv_ci::Kind::bonferroni && ci->bonf_set.fallback ? 1 : 0;
}

int qcv_ci_node_count(const qcv_ci* ci) {
  const auto* s = ci ? lambda_set_of(ci) : nullptr;
  return s ? static_cast<int>(s->nodes.size()) : 0;
}

int qcv_ci_node(const qcv_ci* ci, int index, double* lambda, double* lr, double* critical,
                int* accepted, int* ok) {
  return guard([&] {
    need(ci, "ci");
    const auto* s = lambda_set_of(ci);
    require(s != nullptr, "coefficient sets have no Lambda nodes");
    require(index >= 0 && index < static_cast<int>(s->nodes.size()), "node index out of range");
    const auto& n = s->nodes[static_cast<std::size_t>(index)];
    write(n.lambda, lambda);
    if (lr) *lr = n.lr;
    if (critical) *critical = n.critical;
    if (accepted) *accepted = n.accepted ? 1 : 0;
    if (ok) *ok = n.ok ? 1 : 0;
  });
}

int qcv_ci_conditional_count(const qcv_ci* ci) {
  return ci && ci->kind == qcv_ci::Kind::bonferroni
             ? static_cast<int>(ci->bonf_set.conditional.size())
             : 0;
}

int qcv_ci_conditional(const qcv_ci* ci, int index, double* lambda, double* lo, double* hi,
                       int* unbounded) {
  return guard([&] {
    need(ci, "ci");
    require(ci->kind == qcv_ci::Kind::bonferroni, "only Bonferroni sets have conditional intervals");
    const auto& v = ci->bonf_set.conditional;
    require(index >= 0 && index < static_cast<int>(v.size()), "conditional index out of range");
    const auto& c = v[static_cast<std::size_t>(index)];
    write(c.lambda0, lambda);
    if (lo) *lo = c.set.hull.lo;
    if (hi) *hi = c.set.hull.hi;
    if (unbounded) *unbounded = c.set.unbounded ? 1 : 0;
  });
}

int qcv_ci_warning_count(const qcv_ci* ci) {
  if (!ci) return 0;
  switch (ci->kind) {
    case qcv_ci::Kind::lambda: return static_cast<int>(ci->lambda_set.warnings.size());
    case qcv_ci::Kind::coefficient: return static_cast<int>(ci->coef_set.diagnostics.size());
    case qcv_ci::Kind::bonferroni: return static_cast<int>(ci->bonf_set.warnings.size());
  }
  return 0;
}

const char* qcv_ci_warning(const qcv_ci* ci, int index) {
  if (!ci) return nullptr;
  switch (ci->kind) {
    case qcv_ci::Kind::lambda: return string_at(ci->lambda_set.warnings, index);
    case qcv_ci::Kind::coefficient: return string_at(ci->coef_set.diagnostics, index);
    case qcv_ci::Kind::bonferroni: return string_at(ci->bonf_set.warnings, index);
  }
  return nullptr;
}

// ---- simulation

int qcv_simulate(const qcv_var* var, const double* sigma, const double* mu, const double* delta,
                 int n, uint64_t seed, int zero_noise, double* y, double* eps) {
  return guard([&] {
    need(var, "var");
    require(n >= 1, "n must be positive");
    const int p = var->coeffs.p();
    qcvar::DgpSpec spec{var->coeffs, read(sigma, p, p),
                        mu ? qcvar::Vector(read(mu, p, 1)) : qcvar::Vector::Zero(p),
                        delta ? qcvar::Vector(read(delta, p, 1)) : qcvar::Vector::Zero(p), n};
    qcvar::SimulateOptions options;
    options.zero_noise = zero_noise != 0;
    const auto path = qcvar::simulate(spec, seed, options);
    write(path.y, y);
    write(path.eps, eps);
  });
}

}  // extern "C"
