#pragma once

// Random instances, Monte Carlo designs and independent oracles shared by the
// unit tests and the acceptance suite.

#include "qcvar/dgp.hpp"
#include "qcvar/linalg.hpp"
#include "qcvar/rng.hpp"
#include "qcvar/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <initializer_list>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace qcvar::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline Matrix random_normal(Engine& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Companion matrix written out block by block, without the library routine.
inline Matrix companion_oracle(const Matrix& stacked, int k) {
  const auto p = stacked.rows();
  Matrix F = Matrix::Zero(k * p, k * p);
  F.topRows(p) = stacked;
  for (int i = 1; i < k; ++i) F.block(i * p, (i - 1) * p, p, p).setIdentity();
  return F;
}

/// ∂y_{t+s}/∂ε_t by iterating the VAR recursion on a unit impulse.
inline Matrix irf_oracle(const Matrix& stacked, int k, int s) {
  const auto p = stacked.rows();
  std::vector<Matrix> psi{Matrix::Identity(p, p)};
  for (int h = 1; h <= s; ++h) {
    Matrix next = Matrix::Zero(p, p);
    for (int i = 1; i <= std::min(h, k); ++i) next += stacked.middleCols((i - 1) * p, p) * psi[h - i];
    psi.push_back(next);
  }
  return psi[s];
}

/// Eigenvalues of m as a sorted complex list (modulus, then real, then imag).
inline std::vector<Complex> eigenvalues(const Matrix& m) {
  std::vector<Complex> out;
  if (m.size() == 0) return out;
  Eigen::EigenSolver<Matrix> es(m, false);
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(es.eigenvalues()(i));
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (std::abs(std::abs(a) - std::abs(b)) > 1e-9) return std::abs(a) > std::abs(b);
    if (std::abs(a.real() - b.real()) > 1e-9) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

/// Largest distance in a greedy nearest pairing between two multisets.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const Complex& z : a) {
    auto best = std::min_element(b.begin(), b.end(), [&](Complex u, Complex v) {
      return std::abs(u - z) < std::abs(v - z);
    });
    worst = std::max(worst, std::abs(*best - z));
    b.erase(best);
  }
  return worst;
}

struct Instance {
  VarCoefficients coeffs;
  int q;
  SpectralSplit split;
};

/// Random VAR coefficients with a random q at which the companion roots
/// separate; draws that do not separate are redrawn.
inline Instance random_instance(Engine& rng, int p, int k, double scale = 0.6) {
  std::uniform_int_distribution<int> pick_q(1, p);
  for (;;) {
    Matrix stacked = random_normal(rng, p, k * p, scale / std::sqrt(static_cast<double>(p * k)));
    const int q = pick_q(rng);
    try {
      VarCoefficients coeffs(stacked, k);
      auto sp = split(coeffs, q);
      return Instance{std::move(coeffs), q, std::move(sp)};
    } catch (const std::exception&) {
    }
  }
}

/// Symmetric q×q Λ_lu with eigenvalues drawn from [lo, hi].
inline Matrix random_symmetric_lambda(Engine& rng, int q, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix Q = Eigen::HouseholderQR<Matrix>(random_normal(rng, q, q)).householderQ();
  Vector d(q);
  for (int i = 0; i < q; ++i) d(i) = u(rng);
  return Q * d.asDiagonal() * Q.transpose();
}

/// VAR on 𝒫 built from a random A and near-unity Λ_lu.
inline Instance random_p_instance(Engine& rng, int p, int k, int q, double lo = 0.9,
                                  double hi = 1.0) {
  for (;;) {
    const Matrix A = random_normal(rng, p - q, q);
    const Matrix lambda = random_symmetric_lambda(rng, q, lo, hi);
    try {
      auto coeffs = build_var(A, lambda, rng(), k);
      auto sp = split(coeffs, q);
      return Instance{std::move(coeffs), q, std::move(sp)};
    } catch (const std::exception&) {
    }
  }
}

/// Simulated DGP of the Monte Carlo designs: p = 2, k = 1, q = 1, A = 1,
/// stationary pair R_st = [1; 0], Λ_st = 0.5, Λ_lu = 1 + C/n.
struct McDesign {
  double C = -5.0;
  int n = 500;
  double a_true = 1.0;
  Matrix sigma = (Matrix(2, 2) << 1.0, 0.5, 0.5, 1.0).finished();
  Vector mu = (Vector(2) << 1.0, -0.5).finished();
  Vector delta = (Vector(2) << 0.02, 0.01).finished();

  double lambda_true() const { return 1.0 + C / n; }

  VarCoefficients coeffs() const {
    const Matrix A = Matrix::Constant(1, 1, a_true);
    const Matrix R_st = (Matrix(2, 1) << 1.0, 0.0).finished();
    return build_var_from_parts(A, Matrix::Constant(1, 1, lambda_true()), R_st,
                                Matrix::Constant(1, 1, 0.5), 1);
  }

  Matrix data(std::uint64_t seed) const {
    DgpSpec spec{coeffs(), sigma, mu, delta, n};
    return simulate(spec, seed).y;
  }
};

}  // namespace qcvar::testing
