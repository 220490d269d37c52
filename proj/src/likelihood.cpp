#include "qcvar/likelihood.hpp"

#include "qcvar/error.hpp"
#include "qcvar/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace qcvar {

const char* to_string(DetCase det) noexcept {
  switch (det) {
    case DetCase::none: return "none";
    case DetCase::constant: return "const";
    case DetCase::trend: return "trend";
  }
  return "unknown";
}

DetCase parse_det(const std::string& name) {
  if (name == "none") return DetCase::none;
  if (name == "const" || name == "constant") return DetCase::constant;
  if (name == "trend") return DetCase::trend;
  throw Error(ErrorKind::input, "unknown deterministic case '" + name + "' (none|const|trend)");
}

int det_columns(DetCase det) noexcept {
  return det == DetCase::none ? 0 : det == DetCase::constant ? 1 : 2;
}

const char* to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iter: return "max-iter";
    case FitStatus::constraint_infeasible: return "constraint-infeasible";
  }
  return "unknown";
}

namespace {

// Design of deterministic terms for 0-based rows `first`..`first+count−1` of
// the original sample; the trend is the 1-based time index.
Matrix det_design(DetCase det, int first, int count) {
  Matrix D(count, det_columns(det));
  for (int i = 0; i < count; ++i) {
    if (det != DetCase::none) D(i, 0) = 1.0;
    if (det == DetCase::trend) D(i, 1) = static_cast<double>(first + i + 1);
  }
  return D;
}

// Residual of M after least-squares projection on the columns of Z.
Matrix partial_out(const Matrix& M, const Matrix& Z) {
  if (Z.cols() == 0) return M;
  Eigen::ColPivHouseholderQR<Matrix> qr(Z);
  return M - Z * qr.solve(M);
}

void check_data(const Matrix& data, int k) {
  if (k < 1) throw Error(ErrorKind::input, "lag order k must be positive");
  if (data.cols() < 1 || data.rows() < 1) throw Error(ErrorKind::input, "data set is empty");
  if (!data.allFinite()) throw Error(ErrorKind::input, "data contain non-finite values");
}

}  // namespace

RegressionProblem::RegressionProblem(const Matrix& data_in, int k_in, DetCase det_in,
                                     const RegressionOptions& options)
    : data(data_in), p(static_cast<int>(data_in.cols())), k(k_in), det(det_in), nobs(0) {
  check_data(data, k);
  const int N = static_cast<int>(data.rows());
  const int d = det_columns(det);
  if (N <= k * p + p + 2 || N - k <= k * p + d) {
    std::ostringstream msg;
    msg << "too few observations (" << N << ") for k=" << k << ", p=" << p
        << " and the requested deterministic terms";
    throw Error(ErrorKind::input, msg.str());
  }
  nobs = N - k;
  Y = data.bottomRows(nobs);
  X.resize(nobs, k * p);
  for (int i = 1; i <= k; ++i) X.middleCols((i - 1) * p, p) = data.middleRows(k - i, nobs);
  D = det_design(det, k, nobs);
  Yr = partial_out(Y, D);
  Xr = partial_out(X, D);

  Eigen::ColPivHouseholderQR<Matrix> qr(Xr);
  // Rank relative to the raw lags: after partialling out (1, t) a collinear
  // lag is roundoff noise, which Eigen's default threshold would call full rank.
  const double max_pivot = qr.maxPivot();
  if (max_pivot > 0.0) qr.setThreshold(std::max(1e-11 * X.norm() / max_pivot, 1e-15));
  Matrix B;
  if (qr.rank() < k * p) {
    if (!options.allow_rank_deficient)
      throw Error(ErrorKind::numerical,
                  "singular design: lagged regressors are collinear with each other or with the "
                  "deterministic terms (rank " + std::to_string(qr.rank()) + " of " +
                      std::to_string(k * p) + ")");
    rank_deficient = true;
    warnings.push_back("collinear design; using the minimum-norm least-squares solution");
    B = Eigen::CompleteOrthogonalDecomposition<Matrix>(Xr).solve(Yr);
  } else {
    B = qr.solve(Yr);
  }
  phi_ols = B.transpose();
  const Matrix E = Yr - Xr * B;
  sigma_hat = E.transpose() * E / static_cast<double>(nobs);
  Sxx = Xr.transpose() * Xr;
  sxx_ldlt_.compute(Sxx);

  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_hat);
  const Vector ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() <= 1e-13 * std::max(top, 1e-300)) {
    warnings.push_back("residual covariance is singular; loglikelihood is unbounded");
    Vector inv = Vector::Zero(p);
    for (int i = 0; i < p; ++i)
      if (ev(i) > 1e-13 * top) inv(i) = 1.0 / ev(i);
    weight = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    logdet_sigma = -std::numeric_limits<double>::infinity();
    loglik_ols = std::numeric_limits<double>::infinity();
  } else {
    weight = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    logdet_sigma = ev.array().log().sum();
    loglik_ols = -0.5 * nobs * logdet_sigma - 0.5 * nobs * p;
  }
}

double RegressionProblem::loglik(const Matrix& phi) const {
  const Matrix diff = phi - phi_ols;
  return loglik_ols - 0.5 * (weight * diff * Sxx * diff.transpose()).trace();
}

Matrix RegressionProblem::det_coefficients(const Matrix& phi) const {
  if (D.cols() == 0) return Matrix(p, 0);
  const Matrix U = Y - X * phi.transpose();
  return Eigen::ColPivHouseholderQR<Matrix>(D).solve(U).transpose();
}

Matrix RegressionProblem::sxx_solve(const Matrix& M) const { return sxx_ldlt_.solve(M); }

FitResult ols_fit(const RegressionProblem& problem) {
  FitResult out;
  out.phi = problem.phi_ols;
  out.k = problem.k;
  out.sigma_hat = problem.sigma_hat;
  out.det_coeffs = problem.det_coefficients(problem.phi_ols);
  out.det = problem.det;
  out.loglik = problem.loglik_ols;
  out.nobs = problem.nobs;
  out.warnings = problem.warnings;
  return out;
}

FitResult ols_fit(const Matrix& data, int k, DetCase det, const RegressionOptions& options) {
  return ols_fit(RegressionProblem(data, k, det, options));
}

double concentrated_loglik(const VarCoefficients& coeffs, const Matrix& sigma, const Matrix& data,
                           DetCase det) {
  const int p = coeffs.p(), k = coeffs.k();
  check_data(data, k);
  if (data.cols() != p) throw Error(ErrorKind::input, "data and coefficients disagree on p");
  if (sigma.rows() != p || sigma.cols() != p) throw Error(ErrorKind::input, "sigma must be p x p");
  const int N = static_cast<int>(data.rows()), nobs = N - k;
  if (nobs < 1) throw Error(ErrorKind::input, "not enough observations");
  Eigen::LLT<Matrix> chol(sigma);
  if (chol.info() != Eigen::Success) throw Error(ErrorKind::numerical, "sigma is singular");
  const Matrix L = chol.matrixL();
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) {
    if (!(L(i, i) > 0.0)) throw Error(ErrorKind::numerical, "sigma is singular");
    logdet += 2.0 * std::log(L(i, i));
  }

  Matrix U(nobs, p);
  for (int t = k; t < N; ++t) {
    Vector u = data.row(t).transpose();
    for (int i = 1; i <= k; ++i) u -= coeffs.lag(i) * data.row(t - i).transpose();
    U.row(t - k) = u.transpose();
  }
  const Matrix E = partial_out(U, det_design(det, k, nobs));
  const Matrix W = chol.solve(E.transpose());  // Σ⁻¹ e_t, column per t
  const double quad = (E.transpose().array() * W.array()).sum();
  return -0.5 * nobs * logdet - 0.5 * quad;
}

namespace {

struct Restricted {
  Matrix phi;
  Matrix R_big;
  Matrix target;
  double penalty;
};

void check_restriction_dims(const RegressionProblem& problem, const Matrix& A,
                            const Matrix& lambda0) {
  if (lambda0.rows() != lambda0.cols())
    throw Error(ErrorKind::input, "Lambda0 must be square");
  const auto q = lambda0.rows();
  if (A.cols() != q || A.rows() + q != problem.p) {
    std::ostringstream msg;
    msg << "A is " << A.rows() << "x" << A.cols() << " but p=" << problem.p << ", q=" << q
        << " requires " << problem.p - q << "x" << q;
    throw Error(ErrorKind::input, msg.str());
  }
}

Restricted solve_restricted(const RegressionProblem& problem, const Matrix& A,
                            const Matrix& lambda0) {
  check_restriction_dims(problem, A, lambda0);
  Restricted out;
  out.R_big = stacked_lu_basis(A, lambda0, problem.k);
  out.target = out.R_big.topRows(problem.p) * lambda0;
  const Matrix S = problem.sxx_solve(out.R_big);
  const Matrix M = out.R_big.transpose() * S;
  if (inverse_condition(M) < 1e-14)
    throw Error(ErrorKind::numerical, "singular restricted design");
  const Eigen::LDLT<Matrix> Mf(M);
  const Matrix U = problem.phi_ols * out.R_big - out.target;
  out.phi = problem.phi_ols - U * Mf.solve(S.transpose());
  out.penalty = 0.5 * (problem.weight * U * Mf.solve(U.transpose())).trace();
  return out;
}

double restricted_penalty(const RegressionProblem& problem, const Matrix& A, const Matrix& lambda0) {
  return solve_restricted(problem, A, lambda0).penalty;
}

}  // namespace

FitResult restricted_fit(const RegressionProblem& problem, const Matrix& A, const Matrix& lambda0) {
  const int q = static_cast<int>(lambda0.rows());
  if (q == 0) {
    FitResult out = ols_fit(problem);
    out.A = Matrix(problem.p, 0);
    out.lambda0 = lambda0;
    return out;
  }
  const Restricted r = solve_restricted(problem, A, lambda0);
  FitResult out;
  out.phi = r.phi;
  out.k = problem.k;
  out.sigma_hat = problem.sigma_hat;
  out.det_coeffs = problem.det_coefficients(r.phi);
  out.det = problem.det;
  out.loglik = problem.loglik_ols - r.penalty;
  out.nobs = problem.nobs;
  out.A = A;
  out.lambda0 = lambda0;
  out.warnings = problem.warnings;
  out.constraint_residual = (r.phi * r.R_big - r.target).norm();
  out.status = out.constraint_residual <= 1e-8 * (1.0 + problem.phi_ols.norm())
                   ? FitStatus::converged
                   : FitStatus::constraint_infeasible;
  try {
    out.split = split(out.coeffs(), q);
  } catch (const Error& e) {
    out.warnings.push_back(std::string("estimate does not split: ") + e.what());
  }
  return out;
}

double restricted_loglik(const RegressionProblem& problem, const Matrix& A, const Matrix& lambda0) {
  if (lambda0.rows() == 0) return problem.loglik_ols;
  return problem.loglik_ols - restricted_penalty(problem, A, lambda0);
}

FitResult rrr_fit(const RegressionProblem& problem, double lambda0, int q) {
  const int p = problem.p, k = problem.k, r = p - q;
  if (q < 0 || q > p) throw Error(ErrorKind::input, "q must lie in [0, p]");
  const Matrix& y = problem.data;
  const int nobs = problem.nobs;

  // Δ_λ y_t = Π y_{t−k} + Σ_{i<k} Ψ_i Δ_λ y_{t−i} + deterministic terms.
  auto qdiff = [&](int t) -> Vector { return y.row(t).transpose() - lambda0 * y.row(t - 1).transpose(); };
  Matrix Z0(nobs, p), Z1(nobs, p), Z2(nobs, (k - 1) * p);
  for (int s = 0; s < nobs; ++s) {
    const int t = k + s;
    Z0.row(s) = qdiff(t).transpose();
    Z1.row(s) = y.row(t - k);
    for (int i = 1; i < k; ++i) Z2.block(s, (i - 1) * p, 1, p) = qdiff(t - i).transpose();
  }
  Matrix Z2D(nobs, Z2.cols() + problem.D.cols());
  Z2D << Z2, problem.D;
  const Matrix R0 = partial_out(Z0, Z2D);
  const Matrix R1 = partial_out(Z1, Z2D);
  const double n = nobs;
  const Matrix S00 = R0.transpose() * R0 / n;
  const Matrix S01 = R0.transpose() * R1 / n;
  const Matrix S11 = R1.transpose() * R1 / n;

  Matrix Pi = Matrix::Zero(p, p);
  Matrix A(r, q);
  if (r > 0) {
    Eigen::LLT<Matrix> c11(S11);
    if (c11.info() != Eigen::Success)
      throw Error(ErrorKind::numerical, "reduced-rank regression: level moment matrix is singular");
    Eigen::LDLT<Matrix> c00(S00);
    if (c00.info() != Eigen::Success || inverse_condition(S00) < 1e-15)
      throw Error(ErrorKind::numerical, "reduced-rank regression: quasi-difference moments singular");
    const Matrix Linv = c11.matrixL().solve(Matrix::Identity(p, p));
    Matrix Cm = Linv * S01.transpose() * c00.solve(S01) * Linv.transpose();
    Cm = 0.5 * (Cm + Cm.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(Cm);
    if (es.info() != Eigen::Success)
      throw Error(ErrorKind::numerical, "reduced-rank regression: eigenproblem failed");
    // Eigenvalues ascend; the top r belong to the last columns.
    const Matrix beta = Linv.transpose() * es.eigenvectors().rightCols(r);
    const Matrix alpha = S01 * beta * (beta.transpose() * S11 * beta).inverse();
    Pi = alpha * beta.transpose();
    if (q > 0) {
      const Matrix B1 = beta.topRows(r), B2 = beta.bottomRows(q);
      if (inverse_condition(B1) < 1e-12)
        throw Error(ErrorKind::normalization,
                    "reduced-rank estimate cannot be normalized as [I, -A]; reorder the series");
      A = -(B2 * B1.inverse()).transpose();
    }
  }

  // Short-run coefficients given Π.
  Matrix Psi(p, (k - 1) * p);
  if (k > 1) {
    const Matrix lhs = Z0 - Z1 * Pi.transpose();
    const Matrix coef = Eigen::ColPivHouseholderQR<Matrix>(Z2D).solve(lhs);
    Psi = coef.topRows((k - 1) * p).transpose();
  }
  Matrix phi(p, k * p);
  const Matrix I = Matrix::Identity(p, p);
  if (k == 1) {
    phi = Pi + lambda0 * I;
  } else {
    phi.leftCols(p) = Psi.leftCols(p) + lambda0 * I;
    for (int i = 2; i < k; ++i)
      phi.middleCols((i - 1) * p, p) =
          Psi.middleCols((i - 1) * p, p) - lambda0 * Psi.middleCols((i - 2) * p, p);
    phi.rightCols(p) = Pi - lambda0 * Psi.rightCols(p);
  }

  FitResult out;
  out.phi = phi;
  out.k = k;
  out.sigma_hat = problem.sigma_hat;
  out.det_coeffs = problem.det_coefficients(phi);
  out.det = problem.det;
  out.loglik = problem.loglik(phi);
  out.nobs = nobs;
  out.A = A;
  out.lambda0 = lambda0 * Matrix::Identity(q, q);
  out.warnings = problem.warnings;
  if (q > 0) {
    const Matrix R_big = stacked_lu_basis(A, out.lambda0, k);
    out.constraint_residual =
        (phi * R_big - R_big.topRows(p) * out.lambda0).norm();
    try {
      out.split = split(out.coeffs(), q);
    } catch (const Error& e) {
      out.warnings.push_back(std::string("estimate does not split: ") + e.what());
    }
  }
  return out;
}

Matrix default_initial_A(const RegressionProblem& problem, const Matrix& lambda0) {
  const int q = static_cast<int>(lambda0.rows()), r = problem.p - q;
  std::vector<Matrix> candidates;
  try {
    candidates.push_back(split(VarCoefficients(problem.phi_ols, problem.k), q).A);
  } catch (const Error&) {
  }
  try {
    candidates.push_back(rrr_fit(problem, lambda0.trace() / q, q).A);
  } catch (const Error&) {
  }
  Matrix best = Matrix::Zero(r, q);
  double best_pen = std::numeric_limits<double>::infinity();
  try {
    best_pen = restricted_penalty(problem, best, lambda0);
  } catch (const Error&) {
  }
  for (const auto& A : candidates) {
    if (!A.allFinite()) continue;
    try {
      const double pen = restricted_penalty(problem, A, lambda0);
      if (pen < best_pen) {
        best_pen = pen;
        best = A;
      }
    } catch (const Error&) {
    }
  }
  return best;
}

FitResult profile_A(const RegressionProblem& problem, const Matrix& lambda0,
                    const ProfileOptions& options) {
  const int q = static_cast<int>(lambda0.rows()), r = problem.p - q;
  if (q < 0 || r < 0) throw Error(ErrorKind::input, "Lambda0 larger than the system");
  if (options.fixed) {
    const auto& f = *options.fixed;
    if (f.i < 0 || f.i >= r || f.j < 0 || f.j >= q)
      throw Error(ErrorKind::input, "fixed coefficient index outside the r x q matrix A");
  }
  Matrix A0 = options.init ? *options.init : default_initial_A(problem, lambda0);
  if (A0.rows() != r || A0.cols() != q) throw Error(ErrorKind::input, "initial A has wrong shape");
  if (options.fixed) A0(options.fixed->i, options.fixed->j) = options.fixed->value;

  const int free_count = r * q - (options.fixed ? 1 : 0);
  if (free_count <= 0) return restricted_fit(problem, A0, lambda0);

  // Free coordinates of vec(A), in column-major order.
  std::vector<int> free_idx;
  for (int c = 0; c < r * q; ++c)
    if (!options.fixed || c != options.fixed->j * r + options.fixed->i) free_idx.push_back(c);
  auto unpack = [&](const Vector& x) {
    Matrix A = A0;
    for (std::size_t m = 0; m < free_idx.size(); ++m) A(free_idx[m] % r, free_idx[m] / r) = x(m);
    return A;
  };
  Vector x0(free_count);
  for (int m = 0; m < free_count; ++m) x0(m) = A0(free_idx[m] % r, free_idx[m] / r);

  auto objective = [&](const Vector& x) {
    try {
      return restricted_penalty(problem, unpack(x), lambda0);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const SimplexResult sr = minimize_simplex(objective, x0, options.simplex);
  FitResult out = restricted_fit(problem, unpack(sr.x), lambda0);
  out.evaluations = sr.evaluations;
  if (!sr.converged && out.status == FitStatus::converged) out.status = FitStatus::max_iter;
  return out;
}

std::vector<double> eigen_lattice(double rho, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::input, "grid step must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorKind::domain, "rho must lie in (0, 1]");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double v = 1.0 - static_cast<double>(i) * step;
    if (v <= rho + 1e-12) break;
    out.push_back(v);
  }
  out.push_back(rho);
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

std::vector<double> angle_lattice(double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::input, "angle step must be positive");
  std::vector<double> out;
  for (long j = 0;; ++j) {
    const double a = static_cast<double>(j) * step;
    if (a >= std::numbers::pi - 1e-12) break;
    out.push_back(a);
  }
  return out;
}

// Nonincreasing tuples of length `len` from `values` (ascending).
void nonincreasing_tuples(const std::vector<double>& values, int len,
                          std::vector<std::vector<double>>& out) {
  std::vector<int> idx(len, static_cast<int>(values.size()) - 1);
  std::function<void(int, int)> rec = [&](int pos, int cap) {
    if (pos == len) {
      std::vector<double> t(len);
      for (int i = 0; i < len; ++i) t[i] = values[idx[i]];
      out.push_back(std::move(t));
      return;
    }
    for (int v = cap; v >= 0; --v) {
      idx[pos] = v;
      rec(pos + 1, v);
    }
  };
  rec(0, static_cast<int>(values.size()) - 1);
}

void cartesian(const std::vector<double>& values, int len, std::vector<std::vector<double>>& out) {
  out.assign(1, {});
  for (int i = 0; i < len; ++i) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out)
      for (double v : values) {
        auto t = prefix;
        t.push_back(v);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
}

bool in_lu_region(Complex z, double rho) { return RegionSpec(rho).in_lu(z); }

}  // namespace

std::vector<LambdaParam> grid_points(const LambdaGrid& grid) {
  if (!grid.points.empty()) return grid.points;
  if (grid.q < 1) throw Error(ErrorKind::input, "q must be positive for a Lambda grid");
  const std::vector<double> lattice = eigen_lattice(grid.rho, grid.step);
  std::vector<LambdaParam> out;
  const int q = grid.q;
  if (grid.family == LambdaFamily::scalar || q == 1) {
    for (double v : lattice) out.push_back({grid.family, q, {v}, 0});
    return out;
  }
  const int n_angles = q * (q - 1) / 2;
  std::vector<std::vector<double>> angle_sets;
  cartesian(angle_lattice(grid.angle_step), n_angles, angle_sets);
  const std::vector<double> zero_angles(n_angles, 0.0);

  const int max_pairs = grid.family == LambdaFamily::normal ? q / 2 : 0;
  for (int pairs = 0; pairs <= max_pairs; ++pairs) {
    // Complex pairs (a, b), b > 0, inside the near-unity region.
    std::vector<std::pair<double, double>> pair_values;
    if (pairs > 0) {
      for (double a : lattice)
        for (long j = 1;; ++j) {
          const double b = static_cast<double>(j) * grid.step;
          const Complex z(a, b);
          if (std::abs(z) > 1.0 + 1e-12 || std::abs(1.0 - z) > 1.0 - grid.rho + 1e-12) break;
          if (std::abs(z) >= grid.rho - 1e-12) pair_values.emplace_back(a, b);
        }
    }
    std::vector<std::vector<double>> reals;
    nonincreasing_tuples(lattice, q - 2 * pairs, reals);
    // Pair tuples (nonincreasing by index) for pairs > 0.
    std::vector<std::vector<int>> pair_tuples;
    if (pairs > 0) {
      std::vector<int> idx(pairs);
      std::function<void(int, int)> rec = [&](int pos, int cap) {
        if (pos == pairs) {
          pair_tuples.push_back(idx);
          return;
        }
        for (int v = cap; v >= 0; --v) {
          idx[pos] = v;
          rec(pos + 1, v);
        }
      };
      if (!pair_values.empty()) rec(0, static_cast<int>(pair_values.size()) - 1);
    } else {
      pair_tuples.push_back({});
    }
    for (const auto& pt : pair_tuples) {
      for (const auto& rt : reals) {
        std::vector<double> eig;
        for (int idx : pt) {
          eig.push_back(pair_values[idx].first);
          eig.push_back(pair_values[idx].second);
        }
        eig.insert(eig.end(), rt.begin(), rt.end());
        const bool all_equal =
            pairs == 0 && std::all_of(rt.begin(), rt.end(), [&](double v) { return v == rt[0]; });
        const auto& angles = all_equal ? std::vector<std::vector<double>>{zero_angles} : angle_sets;
        for (const auto& ang : angles) {
          LambdaParam lp{grid.family, q, eig, pairs};
          lp.theta.insert(lp.theta.end(), ang.begin(), ang.end());
          out.push_back(std::move(lp));
        }
      }
    }
  }
  return out;
}

namespace {

// Materialized Λ, rejecting eigenvalues outside the near-unity region.
Matrix checked_lambda(const LambdaParam& param, double rho) {
  Matrix lambda = lambda_materialize(param, rho);
  if (param.family == LambdaFamily::normal && param.complex_pairs > 0) {
    for (int c = 0; c < param.complex_pairs; ++c) {
      const Complex z(param.theta[2 * c], param.theta[2 * c + 1]);
      if (!in_lu_region(z, rho))
        throw Error(ErrorKind::domain, "complex eigenvalue outside the near-unity region");
    }
  }
  return lambda;
}

}  // namespace

ProfileLambdaResult profile_lambda(const RegressionProblem& problem, const LambdaGrid& grid) {
  const std::vector<LambdaParam> points = grid_points(grid);
  if (points.empty()) throw Error(ErrorKind::input, "Lambda grid is empty");
  ProfileLambdaResult out;
  out.trace.resize(points.size());
  std::vector<std::optional<FitResult>> fits(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    GridEvaluation& ev = out.trace[i];
    ev.param = points[i];
    try {
      ev.lambda = checked_lambda(points[i], grid.rho);
      FitResult fit = profile_A(problem, ev.lambda);
      ev.loglik = fit.loglik;
      ev.A = fit.A;
      ev.ok = true;
      fits[i] = std::move(fit);
    } catch (const Error& e) {
      ev.error = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!out.trace[i].ok) {
      ++out.failures;
      continue;
    }
    if (!best || out.trace[i].loglik > out.trace[*best].loglik) best = i;
  }
  if (!best) {
    std::string msg = "no grid point could be fitted";
    if (!out.trace.empty()) msg += "; first failure: " + out.trace.front().error;
    throw Error(ErrorKind::numerical, msg);
  }
  out.best = *fits[*best];
  out.best_param = points[*best];
  out.best_lambda = out.trace[*best].lambda;

  if (grid.refine && grid.points.empty()) {
    LambdaParam seed = out.best_param;
    auto value_at = [&](const LambdaParam& lp) {
      try {
        const Matrix lam = checked_lambda(lp, grid.rho);
        return -profile_A(problem, lam).loglik;
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    LambdaParam cand = seed;
    double cand_value = std::numeric_limits<double>::infinity();
    if (seed.theta.size() == 1) {
      const double lo = std::max(grid.rho, seed.theta[0] - grid.step);
      const double hi = std::min(1.0, seed.theta[0] + grid.step);
      auto f = [&](double v) {
        LambdaParam lp = seed;
        lp.theta[0] = v;
        return value_at(lp);
      };
      const auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, 40);
      cand.theta[0] = x;
      cand_value = fx;
    } else {
      Vector x0 = Eigen::Map<const Vector>(seed.theta.data(), static_cast<Eigen::Index>(seed.theta.size()));
      SimplexOptions so;
      so.initial_step = grid.step;
      so.max_restarts = 2;
      so.max_evaluations = 4000;
      auto f = [&](const Vector& x) {
        LambdaParam lp = seed;
        lp.theta.assign(x.data(), x.data() + x.size());
        return value_at(lp);
      };
      const SimplexResult sr = minimize_simplex(f, x0, so);
      cand.theta.assign(sr.x.data(), sr.x.data() + sr.x.size());
      cand_value = sr.value;
    }
    if (std::isfinite(cand_value) && -cand_value > out.best.loglik) {
      const Matrix lam = checked_lambda(cand, grid.rho);
      FitResult fit = profile_A(problem, lam);
      if (fit.loglik > out.best.loglik) {
        out.best = std::move(fit);
        out.best_param = cand;
        out.best_lambda = lam;
        out.refined = true;
      }
    }
  }
  return out;
}

}  // namespace qcvar
