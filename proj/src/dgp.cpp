#include "qcvar/dgp.hpp"

#include "qcvar/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qcvar {

namespace {

Matrix standard_normal(Engine& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

double min_modulus(const Matrix& m) {
  return Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().minCoeff();
}

void check_lu_inputs(const Matrix& A, const Matrix& lambda_lu) {
  if (lambda_lu.rows() != lambda_lu.cols() || lambda_lu.rows() < 1)
    throw Error(ErrorKind::input, "Lambda_lu must be square and nonempty");
  if (A.cols() != lambda_lu.rows())
    throw Error(ErrorKind::input, "A must have q columns");
}

}  // namespace

VarCoefficients build_var_from_parts(const Matrix& A, const Matrix& lambda_lu, const Matrix& R_st,
                                     const Matrix& lambda_st, int k) {
  check_lu_inputs(A, lambda_lu);
  const auto q = lambda_lu.rows(), p = A.rows() + q, m = k * p - q;
  if (R_st.rows() != p || R_st.cols() != m || lambda_st.rows() != m || lambda_st.cols() != m)
    throw Error(ErrorKind::input, "stationary part has inconsistent dimensions");
  Matrix R(p, k * p);
  R.block(0, 0, A.rows(), q) = A;
  R.block(A.rows(), 0, q, q).setIdentity();
  R.rightCols(m) = R_st;
  const Matrix lambda = block_diag(lambda_lu, lambda_st);
  Matrix big_R(k * p, k * p);
  Matrix block = R;
  for (int i = k; i >= 1; --i) {
    big_R.middleRows((i - 1) * p, p) = block;
    if (i > 1) block = block * lambda;
  }
  if (inverse_condition(big_R) < 1e-12)
    throw Error(ErrorKind::construction, "stacked basis is singular; the parts do not form a VAR");
  const Matrix top = R * matrix_power(lambda, k);
  // Φ = top · 𝐑⁻¹, i.e. 𝐑ᵀ Φᵀ = topᵀ.
  const Matrix phi = big_R.transpose().partialPivLu().solve(top.transpose()).transpose();
  return VarCoefficients(phi, k);
}

Matrix project_onto_lu_constraint(const Matrix& base, const Matrix& A, const Matrix& lambda_lu,
                                  int k) {
  check_lu_inputs(A, lambda_lu);
  const Matrix R_big = stacked_lu_basis(A, lambda_lu, k);
  const Matrix R_lu = R_big.bottomRows(A.rows() + lambda_lu.rows());
  const Matrix target = R_lu * matrix_power(lambda_lu, k);
  const Matrix gram = R_big.transpose() * R_big;
  const Matrix correction = (target - base * R_big) * gram.ldlt().solve(R_big.transpose());
  return base + correction;
}

VarCoefficients build_var(const Matrix& A, const Matrix& lambda_lu, std::uint64_t stationary_seed,
                          int k, const BuildOptions& options) {
  check_lu_inputs(A, lambda_lu);
  if (k < 1) throw Error(ErrorKind::input, "lag order k must be positive");
  const auto q = lambda_lu.rows(), p = A.rows() + q, m = k * p - q;
  if (spectral_radius(lambda_lu) > 1.0 + 1e-12)
    throw Error(ErrorKind::domain, "Lambda_lu has an eigenvalue outside the unit disc");
  const double ceiling = min_modulus(lambda_lu) - options.root_gap;
  if (!(ceiling > 0.0))
    throw Error(ErrorKind::domain, "Lambda_lu is too close to singular to leave room for stable roots");

  std::string last;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    Engine rng = make_engine(derive_seed(stationary_seed, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> unit(0.1, 0.9);
    Matrix phi;
    try {
      if (k == 1) {
        Matrix lambda_st = standard_normal(rng, m, m);
        const double rad = spectral_radius(lambda_st);
        if (rad > 0.0) lambda_st *= unit(rng) * ceiling / rad;
        phi = build_var_from_parts(A, lambda_lu, standard_normal(rng, p, m), lambda_st, 1).stacked();
      } else {
        Matrix base = standard_normal(rng, p, k * p);
        const double rad = spectral_radius(companion(VarCoefficients(base, k)));
        if (rad > 0.0) base *= unit(rng) * ceiling / rad;
        phi = project_onto_lu_constraint(base, A, lambda_lu, k);
      }
    } catch (const Error& e) {
      last = e.what();
      continue;
    }
    VarCoefficients coeffs(phi, k);
    const RootSet rs = roots(coeffs);
    int large = 0;
    for (const auto& z : rs.roots) large += std::abs(z) >= ceiling ? 1 : 0;
    if (large != q) {
      std::ostringstream msg;
      msg << "attempt " << attempt + 1 << ": " << large << " roots with modulus >= " << ceiling;
      if (static_cast<std::size_t>(q) < rs.roots.size())
        msg << ", largest stable-side root " << std::abs(rs.roots[q]);
      last = msg.str();
      continue;
    }
    try {
      const SpectralSplit s = split(coeffs, static_cast<int>(q));
      if ((s.A - A).cwiseAbs().maxCoeff() > 1e-6 * (1.0 + A.cwiseAbs().maxCoeff())) {
        last = "split did not reproduce A";
        continue;
      }
      const Matrix scaled = s.big_R * s.big_R.colwise().norm().cwiseInverse().asDiagonal();
      if (inverse_condition(scaled) * options.max_basis_condition < 1.0) {
        last = "stacked basis condition number above " + std::to_string(options.max_basis_condition);
        continue;
      }
    } catch (const Error& e) {
      last = e.what();
      continue;
    }
    return coeffs;
  }
  throw Error(ErrorKind::construction,
              "could not draw a stable remainder within " + std::to_string(options.max_attempts) +
                  " attempts; last rejection: " + last);
}

LocalSequence local_sequence(const Matrix& C, int n, const StationaryPart& base) {
  if (n < 1) throw Error(ErrorKind::input, "sample size must be positive");
  const auto q = C.rows();
  if (C.cols() != q || base.A.cols() != q)
    throw Error(ErrorKind::input, "C must be q x q with q matching A");
  Matrix lambda_lu = Matrix::Identity(q, q) + C / static_cast<double>(n);
  if (spectral_radius(lambda_lu) > 1.0 + 1.0 / n + 1e-12)
    throw Error(ErrorKind::domain, "I + C/n is explosive beyond 1 + 1/n");
  VarCoefficients realized =
      build_var_from_parts(base.A, lambda_lu, base.R_st, base.lambda_st, base.k);
  return LocalSequence{C, n, std::move(lambda_lu), std::move(realized)};
}

SimulatedPath simulate(const DgpSpec& spec, std::uint64_t seed, const SimulateOptions& options) {
  const int p = spec.coeffs.p(), k = spec.coeffs.k();
  if (spec.n < 1) throw Error(ErrorKind::input, "sample size must be positive");
  if (spec.mu.size() != p || spec.delta.size() != p)
    throw Error(ErrorKind::input, "mu and delta must have length p");
  if (spec.sigma.rows() != p || spec.sigma.cols() != p)
    throw Error(ErrorKind::input, "sigma must be p x p");
  if ((spec.sigma - spec.sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + spec.sigma.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::input, "sigma must be symmetric");
  Eigen::LLT<Matrix> chol(spec.sigma);
  if (chol.info() != Eigen::Success || (chol.matrixL().toDenseMatrix().diagonal().array() <= 0).any())
    throw Error(ErrorKind::input, "sigma is not positive definite");
  const Matrix L = chol.matrixL();

  SimulatedPath out{Matrix(spec.n, p), Matrix(spec.n, p), Matrix::Zero(spec.n, p)};
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  const Matrix& phi = spec.coeffs.stacked();
  Vector lags = Vector::Zero(k * p);  // (x_{t−1}, …, x_{t−k})
  for (int t = 0; t < spec.n; ++t) {
    Vector e = Vector::Zero(p);
    if (!options.zero_noise) {
      if (options.innovation_sampler) {
        e = options.innovation_sampler(rng);
        if (e.size() != p) throw Error(ErrorKind::input, "innovation sampler returned wrong size");
      } else {
        Vector z(p);
        for (int i = 0; i < p; ++i) z(i) = normal(rng);
        e = L * z;
      }
    }
    const Vector x = phi * lags + e;
    out.eps.row(t) = e.transpose();
    out.x.row(t) = x.transpose();
    out.y.row(t) = (spec.mu + spec.delta * static_cast<double>(t + 1) + x).transpose();
    if (k > 1) lags.tail((k - 1) * p) = lags.head((k - 1) * p).eval();
    lags.head(p) = x;
  }
  return out;
}

}  // namespace qcvar
