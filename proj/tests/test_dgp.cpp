#include "qcvar/dgp.hpp"
#include "qcvar/representation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qcvar;
using qcvar::testing::eigenvalues;
using qcvar::testing::kind_of;
using qcvar::testing::mat;
using qcvar::testing::McDesign;
using qcvar::testing::multiset_distance;
using qcvar::testing::random_normal;
using qcvar::testing::random_symmetric_lambda;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix sample_covariance(const Matrix& x) {
  const Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST(BuildVar, HandWorkedSimilarity) {
  const auto coeffs = build_var_from_parts(mat({{1}}), mat({{1}}), mat({{1}, {0}}), mat({{0.5}}), 1);
  EXPECT_LT(max_abs(coeffs.stacked() - mat({{0.5, 0.5}, {0, 1}})), 1e-14);
  const auto sp = split(coeffs, 1);
  EXPECT_NEAR(sp.A(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(sp.lambda_lu(0, 0), 1.0, 1e-12);
}

TEST(BuildVar, SingleLagRoundTrip) {
  Engine rng(20);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 2 + rep % 3, q = 1 + rep % (p - 1);
    const Matrix A = random_normal(rng, p - q, q);
    const Matrix lambda = random_symmetric_lambda(rng, q, 0.9, 1.0);
    const auto sp = split(build_var(A, lambda, rng(), 1), q);
    EXPECT_LT(max_abs(sp.A - A), 1e-8);
    EXPECT_LT(max_abs(sp.lambda_lu - lambda), 1e-8);
  }
}

TEST(BuildVar, TwoLagRoundTrip) {
  Engine rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 2 + rep % 3, q = 1 + rep % (p - 1);
    const Matrix A = random_normal(rng, p - q, q);
    const Matrix lambda = random_symmetric_lambda(rng, q, 0.9, 1.0);
    const auto coeffs = build_var(A, lambda, rng(), 2);
    const auto sp = split(coeffs, q);
    EXPECT_LT(max_abs(sp.A - A), 1e-8) << rep;
    EXPECT_LT(multiset_distance(eigenvalues(sp.lambda_lu), eigenvalues(lambda)), 1e-8) << rep;
    // the remaining roots sit below the near-unity block with the construction gap
    const auto& z = sp.roots.roots;
    EXPECT_LT(std::abs(z[q]), lambda.eigenvalues().cwiseAbs().minCoeff() - 1e-3 + 1e-12);
  }
}

TEST(BuildVar, ProjectionSatisfiesConstraint) {
  Engine rng(22);
  const Matrix A = mat({{0.3}, {-1.2}});
  const Matrix lambda = mat({{0.97}});
  const Matrix base = random_normal(rng, 3, 6, 0.2);
  const Matrix phi = project_onto_lu_constraint(base, A, lambda, 2);
  const Matrix Rlu = stacked_lu_basis(A, lambda, 2);
  Matrix target(3, 1);
  target << A, Matrix::Identity(1, 1);
  EXPECT_LT(max_abs(phi * Rlu - target * lambda * lambda), 1e-12);
  // least norm: the correction lies in the row space of 𝐑_luᵀ
  const Matrix d = phi - base;
  const Matrix P = Rlu * (Rlu.transpose() * Rlu).inverse() * Rlu.transpose();
  EXPECT_LT(max_abs(d - d * P), 1e-12);
}

TEST(BuildVar, DrawsRespectTheBasisConditionBound) {
  Engine rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 2 + rep % 3, k = 1 + rep % 3, q = 1 + rep % (p - 1);
    const Matrix A = random_normal(rng, p - q, q);
    const Matrix lambda = random_symmetric_lambda(rng, q, 0.9, 1.0);
    BuildOptions opt;
    opt.max_basis_condition = 200;
    const auto sp = split(build_var(A, lambda, rng(), k, opt), q);
    const Matrix scaled = sp.big_R * sp.big_R.colwise().norm().cwiseInverse().asDiagonal();
    EXPECT_GE(inverse_condition(scaled) * 200, 1.0) << rep;
  }
  BuildOptions impossible;
  impossible.max_basis_condition = 1.0;
  impossible.max_attempts = 5;
  EXPECT_EQ(kind_of([&] { build_var(mat({{0.5}}), mat({{0.97}}), 1, 1, impossible); }),
            ErrorKind::construction);
}

TEST(BuildVar, Errors) {
  EXPECT_EQ(kind_of([] { build_var(mat({{0}}), mat({{1.2}}), 1, 1); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { build_var(mat({{0}}), mat({{1}}), 1, 0); }), ErrorKind::input);
  EXPECT_EQ(kind_of([] { build_var(mat({{0, 1}}), mat({{1}}), 1, 1); }), ErrorKind::input);
  EXPECT_EQ(kind_of([] { build_var_from_parts(mat({{1}}), mat({{1}}), mat({{1}, {1}}), mat({{0.5}}), 1); }),
            ErrorKind::construction);
}

TEST(LocalSequence, Examples) {
  const StationaryPart base1{mat({{1}}), mat({{1}, {0}}), mat({{0.5}}), 1};
  EXPECT_EQ(local_sequence(mat({{0}}), 500, base1).lambda_lu, mat({{1}}));
  const StationaryPart base2{mat({{0.5, -1}}), mat({{1}, {0}, {1}}), mat({{0.4}}), 1};
  const auto s1 = local_sequence(-5 * Matrix::Identity(2, 2), 100, base2);
  EXPECT_LT(max_abs(s1.lambda_lu - 0.95 * Matrix::Identity(2, 2)), 1e-15);
  const auto s2 = local_sequence(mat({{0, 1}, {0, 0}}), 200, base2);
  EXPECT_LT(max_abs(s2.lambda_lu - mat({{1, 0.005}, {0, 1}})), 1e-15);
  for (const auto* s : {&s1, &s2}) {
    const auto sp = split(s->realized, 2);
    EXPECT_LT(max_abs(sp.lambda_lu - s->lambda_lu), 1e-8);
    EXPECT_LT(max_abs(sp.A - base2.A), 1e-8);
  }
}

TEST(LocalSequence, StationaryPairHeldFixedAndLuLoadingsConverge) {
  // k = 2 so that 𝐑, and hence L_lu, moves with Λ_lu along the sequence.
  const Matrix lambda_st = mat({{0.5, 0, 0}, {0, -0.3, 0}, {0, 0, 0.2}});
  const StationaryPart base{mat({{1}}), mat({{1, 0.3, -0.5}, {0, 1, 0.7}}), lambda_st, 2};
  Matrix previous;
  double previous_gap = INFINITY;
  for (int n : {100, 1000, 10000, 100000}) {
    const auto seq = local_sequence(mat({{-5}}), n, base);
    const auto sp = split(seq.realized, 1);
    EXPECT_LT(multiset_distance(eigenvalues(sp.lambda_st), eigenvalues(lambda_st)), 1e-10);
    if (previous.size()) {
      const double gap = max_abs(sp.L_lu - previous);
      EXPECT_LT(gap, previous_gap);
      previous_gap = gap;
    }
    previous = sp.L_lu;
  }
  EXPECT_LT(previous_gap, 1e-2);
}

TEST(LocalSequence, ExplosiveDriftRejected) {
  const StationaryPart base{mat({{1}}), mat({{1}, {0}}), mat({{0.5}}), 1};
  EXPECT_EQ(kind_of([&] { local_sequence(mat({{5}}), 100, base); }), ErrorKind::domain);
  EXPECT_NO_THROW(local_sequence(mat({{1}}), 100, base));
}

TEST(Simulate, ZeroNoiseIsTheDeterministicTrend) {
  McDesign d;
  DgpSpec spec{d.coeffs(), d.sigma, d.mu, d.delta, 50};
  SimulateOptions opt;
  opt.zero_noise = true;
  const auto path = simulate(spec, 1, opt);
  for (int t = 0; t < 50; ++t)
    EXPECT_EQ(path.y.row(t).transpose(), d.mu + d.delta * static_cast<double>(t + 1));
  EXPECT_EQ(max_abs(path.eps), 0.0);
}

TEST(Simulate, WhiteNoisePassthrough) {
  DgpSpec spec{VarCoefficients(mat({{0}}), 1), mat({{1}}), Vector::Zero(1), Vector::Zero(1), 200};
  const auto path = simulate(spec, 5);
  EXPECT_EQ(path.y, path.eps);
  EXPECT_GT(max_abs(path.eps), 0.0);
}

TEST(Simulate, InnovationCovarianceMatchesSigma) {
  // Five independent 10⁵-step paths pooled; 3 standard errors of the pooled estimate.
  McDesign d;
  const int n = 100000, paths = 5;
  Matrix S = Matrix::Zero(2, 2);
  for (int seed = 1; seed <= paths; ++seed) {
    DgpSpec spec{d.coeffs(), d.sigma, d.mu, d.delta, n};
    const Matrix e = simulate(spec, seed).eps;
    S += e.transpose() * e / static_cast<double>(n * paths);
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((d.sigma(i, i) * d.sigma(j, j) + d.sigma(i, j) * d.sigma(i, j)) /
                                  (n * paths));
      EXPECT_LT(std::abs(S(i, j) - d.sigma(i, j)), 3 * se) << i << "," << j;
    }
}

TEST(Simulate, BitReproducible) {
  McDesign d;
  DgpSpec spec{d.coeffs(), d.sigma, d.mu, d.delta, 300};
  const auto a = simulate(spec, 42), b = simulate(spec, 42), c = simulate(spec, 43);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.eps, b.eps);
  EXPECT_NE(a.y, c.y);
}

TEST(Simulate, CustomSampler) {
  McDesign d;
  DgpSpec spec{d.coeffs(), d.sigma, Vector::Zero(2), Vector::Zero(2), 10};
  SimulateOptions opt;
  opt.innovation_sampler = [](Engine&) { return Vector::Ones(2).eval(); };
  EXPECT_EQ(simulate(spec, 1, opt).eps, Matrix::Ones(10, 2));
  opt.innovation_sampler = [](Engine&) { return Vector::Ones(3).eval(); };
  EXPECT_EQ(kind_of([&] { simulate(spec, 1, opt); }), ErrorKind::input);
}

TEST(Simulate, RejectsBadSigma) {
  McDesign d;
  DgpSpec spec{d.coeffs(), mat({{1, 2}, {2, 1}}), d.mu, d.delta, 10};
  EXPECT_EQ(kind_of([&] { simulate(spec, 1); }), ErrorKind::input);
  spec.sigma = mat({{1, 0.5}, {0.4, 1}});
  EXPECT_EQ(kind_of([&] { simulate(spec, 1); }), ErrorKind::input);
}

TEST(Simulate, QcsCombinationIsStationaryAtUnitRoot) {
  McDesign d;
  d.C = 0.0;
  const Matrix beta = qcs_basis(mat({{d.a_true}}));
  auto mean_late_variance = [&](int n) {
    double total = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
      DgpSpec spec{d.coeffs(), d.sigma, Vector::Zero(2), Vector::Zero(2), n};
      const Matrix bx = simulate(spec, seed).x * beta;
      total += sample_covariance(bx.bottomRows(n - n / 2))(0, 0);
    }
    return total / 20;
  };
  const double ratio = mean_late_variance(2000) / mean_late_variance(500);
  EXPECT_GT(ratio, 0.5);
  EXPECT_LT(ratio, 2.0);
  // and the lu direction does grow
  DgpSpec spec{d.coeffs(), d.sigma, Vector::Zero(2), Vector::Zero(2), 2000};
  const Matrix x = simulate(spec, 1).x;
  EXPECT_GT(sample_covariance(x.col(1))(0, 0), 5 * sample_covariance(x * beta)(0, 0));
}
