#pragma once

#include "qcvar/optim.hpp"
#include "qcvar/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcvar {

/// Deterministic terms concentrated out of the likelihood:
/// trend = unrestricted intercept and trend, constant = intercept only.
enum class DetCase { none, constant, trend };

const char* to_string(DetCase det) noexcept;
DetCase parse_det(const std::string& name);
int det_columns(DetCase det) noexcept;

struct RegressionOptions {
  // Use a minimum-norm solution instead of failing on a collinear design.
  bool allow_rank_deficient = false;
};

/// Data aligned for a VAR(k) regression, with deterministic terms partialled
/// out and the unrestricted OLS solution precomputed. Rows t = k+1..N enter.
struct RegressionProblem {
  RegressionProblem(const Matrix& data, int k, DetCase det, const RegressionOptions& options = {});

  Matrix data;  // N × p
  int p;
  int k;
  DetCase det;
  int nobs;

  Matrix Y;   // nobs × p, y_t
  Matrix X;   // nobs × kp, (y_{t−1}, …, y_{t−k})
  Matrix D;   // nobs × d, (1, t) as required
  Matrix Yr;  // Y with D partialled out
  Matrix Xr;  // X with D partialled out

  Matrix Sxx;
  Matrix phi_ols;    // p × kp
  Matrix sigma_hat;  // EᵀE / nobs at the OLS estimate
  Matrix weight;     // Σ̂⁻¹ (pseudo-inverse when singular)
  double logdet_sigma;
  double loglik_ols;
  bool rank_deficient = false;
  std::vector<std::string> warnings;

  /// ℓ*(Φ) with Σ̂ held at the OLS value.
  double loglik(const Matrix& phi) const;

  /// Intercept/trend coefficients given Φ, p × d.
  Matrix det_coefficients(const Matrix& phi) const;

  /// Sxx⁻¹ M.
  Matrix sxx_solve(const Matrix& M) const;

 private:
  Eigen::LDLT<Matrix> sxx_ldlt_;
};

enum class FitStatus { converged, max_iter, constraint_infeasible };

const char* to_string(FitStatus status) noexcept;

struct FitResult {
  Matrix phi;  // p × kp
  int k = 1;
  Matrix sigma_hat;
  Matrix det_coeffs;  // p × d
  DetCase det = DetCase::none;
  double loglik = 0.0;
  FitStatus status = FitStatus::converged;
  double constraint_residual = 0.0;
  int nobs = 0;
  int evaluations = 0;

  // Restriction data for constrained fits.
  Matrix A;
  Matrix lambda0;

  std::optional<SpectralSplit> split;
  std::vector<std::string> warnings;

  VarCoefficients coeffs() const { return VarCoefficients(phi, k); }
};

FitResult ols_fit(const RegressionProblem& problem);
FitResult ols_fit(const Matrix& data, int k, DetCase det, const RegressionOptions& options = {});

/// Concentrated Gaussian loglikelihood evaluated directly from the data, with
/// the deterministic coefficients fitted by inner least squares.
double concentrated_loglik(const VarCoefficients& coeffs, const Matrix& sigma, const Matrix& data,
                           DetCase det);

/// Maximizer of ℓ* subject to Φ 𝐑_lu(A, Λ₀) = [A; I] Λ₀ᵏ.
FitResult restricted_fit(const RegressionProblem& problem, const Matrix& A, const Matrix& lambda0);

/// Loglikelihood of restricted_fit without assembling the result.
double restricted_loglik(const RegressionProblem& problem, const Matrix& A, const Matrix& lambda0);

/// Coordinate (i, j) of A (zero-based) held at `value`.
struct FixedEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct ProfileOptions {
  std::optional<Matrix> init;
  std::optional<FixedEntry> fixed;
  SimplexOptions simplex;
};

/// max over A of restricted_fit(A, Λ₀); A is returned in FitResult::A.
FitResult profile_A(const RegressionProblem& problem, const Matrix& lambda0,
                    const ProfileOptions& options = {});

/// Default starting value for profile_A: the better (by ℓ*) of the A implied by
/// the unrestricted estimate, when its roots separate, and the reduced-rank
/// estimate at the scalar nearest to Λ₀.
Matrix default_initial_A(const RegressionProblem& problem, const Matrix& lambda0);

/// Reduced-rank estimate with Λ_lu = λ₀ I_q, via canonical correlations of
/// quasi-differenced data.
FitResult rrr_fit(const RegressionProblem& problem, double lambda0, int q);

struct LambdaGrid {
  LambdaFamily family = LambdaFamily::scalar;
  int q = 1;
  double rho = 0.9;
  double step = 0.005;            // eigenvalue spacing
  double angle_step = 0.19634954084936207;  // π/16
  bool refine = false;            // polish the best grid point
  std::vector<LambdaParam> points;  // explicit points; overrides the lattice
};

/// Deterministic lattice over the Λ_lu space described by `grid`.
std::vector<LambdaParam> grid_points(const LambdaGrid& grid);

/// Eigenvalue lattice: 1, 1 − step, … down to ρ (ρ included), ascending.
std::vector<double> eigen_lattice(double rho, double step);

struct GridEvaluation {
  LambdaParam param;
  Matrix lambda;
  bool ok = false;
  double loglik = 0.0;
  Matrix A;
  std::string error;
};

struct ProfileLambdaResult {
  FitResult best;
  LambdaParam best_param;
  Matrix best_lambda;
  std::vector<GridEvaluation> trace;
  int failures = 0;
  bool refined = false;
};

ProfileLambdaResult profile_lambda(const RegressionProblem& problem, const LambdaGrid& grid);

}  // namespace qcvar
