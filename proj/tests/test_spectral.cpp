#include "qcvar/error.hpp"
#include "qcvar/spectral.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace qcvar;
using qcvar::testing::kind_of;
using qcvar::testing::mat;
using qcvar::testing::random_instance;

TEST(Companion, SingleLagIsTheCoefficient) {
  const Matrix M = mat({{0.3, -0.2}, {0.1, 0.7}});
  EXPECT_EQ(companion(VarCoefficients(M, 1)), M);
}

TEST(Companion, ScalarTwoLagLayout) {
  const Matrix F = companion(VarCoefficients(mat({{1.3, -0.4}}), 2));
  EXPECT_EQ(F, mat({{1.3, -0.4}, {1.0, 0.0}}));
}

TEST(Companion, BlockPlacementMatchesHandLayout) {
  Engine rng(7);
  const Matrix stacked = qcvar::testing::random_normal(rng, 2, 4);
  const Matrix F = companion(VarCoefficients(stacked, 2));
  EXPECT_EQ(F, qcvar::testing::companion_oracle(stacked, 2));
  EXPECT_EQ(F.block(0, 0, 2, 2), stacked.leftCols(2));
  EXPECT_EQ(F.block(0, 2, 2, 2), stacked.rightCols(2));
  EXPECT_EQ(F.block(2, 0, 2, 2), Matrix::Identity(2, 2));
}

TEST(VarCoefficientsTest, RejectsBadShapes) {
  EXPECT_EQ(kind_of([] { VarCoefficients(Matrix::Zero(2, 3), 2); }), ErrorKind::input);
  EXPECT_EQ(kind_of([] {
              Matrix m = Matrix::Zero(1, 1);
              m(0, 0) = NAN;
              VarCoefficients(m, 1);
            }),
            ErrorKind::input);
}

TEST(VarCoefficientsTest, AtUnity) {
  VarCoefficients c(mat({{0.5, 0.0, 0.1, 0.0}, {0.0, 0.9, 0.0, 0.05}}), 2);
  EXPECT_TRUE(c.at_unity().isApprox(mat({{0.4, 0.0}, {0.0, 0.05}})));
  EXPECT_EQ(c.lag(2), mat({{0.1, 0.0}, {0.0, 0.05}}));
}

TEST(Roots, ScalarAr1) {
  const auto r = roots(VarCoefficients(mat({{0.9}}), 1));
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_NEAR(r.roots[0].real(), 0.9, 1e-14);
}

TEST(Roots, QuadraticFormula) {
  // λ² − 1.3λ + 0.4 = (λ − 0.8)(λ − 0.5)
  const double disc = std::sqrt(1.3 * 1.3 - 4 * 0.4);
  const auto r = roots(VarCoefficients(mat({{1.3, -0.4}}), 2));
  ASSERT_EQ(r.roots.size(), 2u);
  EXPECT_NEAR(r.roots[0].real(), (1.3 + disc) / 2, 1e-12);
  EXPECT_NEAR(r.roots[1].real(), (1.3 - disc) / 2, 1e-12);
  EXPECT_NEAR(r.roots[0].real(), 0.8, 1e-12);
}

TEST(Roots, DiagonalSortedByModulus) {
  const auto r = roots(VarCoefficients(mat({{0.5, 0.0}, {0.0, 0.95}}), 1));
  EXPECT_NEAR(r.roots[0].real(), 0.95, 1e-14);
  EXPECT_NEAR(r.roots[1].real(), 0.5, 1e-14);
}

TEST(Roots, TieRule) {
  std::vector<Complex> z{{-0.5, 0.0}, {0.0, -0.5}, {0.0, 0.5}, {0.5, 0.0}, {0.9, 0.0}};
  sort_roots(z);
  EXPECT_EQ(z[0], Complex(0.9, 0.0));
  EXPECT_EQ(z[1], Complex(0.5, 0.0));
  EXPECT_EQ(z[2], Complex(0.0, 0.5));
  EXPECT_EQ(z[3], Complex(0.0, -0.5));
  EXPECT_EQ(z[4], Complex(-0.5, 0.0));
}

TEST(Roots, MatchDeterminantZeros) {
  // det Φ(λ) = det(λ²I − Φ₁λ − Φ₂) vanishes at every root.
  Engine rng(11);
  const Matrix stacked = qcvar::testing::random_normal(rng, 3, 6, 0.3);
  const auto r = roots(VarCoefficients(stacked, 2));
  ASSERT_EQ(r.roots.size(), 6u);
  for (const Complex z : r.roots) {
    const Eigen::MatrixXcd P = z * z * Eigen::MatrixXcd::Identity(3, 3) -
                               z * stacked.leftCols(3).cast<Complex>() -
                               stacked.rightCols(3).cast<Complex>();
    EXPECT_LT(std::abs(P.determinant()), 1e-10);
  }
}

TEST(Classify, Examples) {
  const RegionSpec region(0.9);
  auto c = classify(RootSet{{{0.95, 0.0}, {0.5, 0.0}}}, region);
  EXPECT_EQ(c.q, 1);
  EXPECT_EQ(c.regions[0], RootRegion::lu);
  EXPECT_EQ(c.regions[1], RootRegion::st);

  c = classify(RootSet{{{1.0, 0.0}, {0.3, 0.0}}}, region);
  EXPECT_EQ(c.q, 1);
}

TEST(Classify, ComplexPairOutsideBothRegions) {
  const Complex z = std::polar(0.95, 0.4);
  // |1 − z|² = 1 − 2·0.95 cos 0.4 + 0.95²
  const double dist = std::sqrt(1.0 - 2.0 * 0.95 * std::cos(0.4) + 0.95 * 0.95);
  EXPECT_NEAR(std::abs(1.0 - z), dist, 1e-14);
  EXPECT_GT(dist, 0.1);
  EXPECT_EQ(kind_of([&] { classify(RootSet{{z, std::conj(z)}}, RegionSpec(0.9)); }),
            ErrorKind::classification);
}

TEST(Classify, BoundaryWarning) {
  const auto c = classify(RootSet{{{0.9, 0.0}, {0.2, 0.0}}}, RegionSpec(0.9));
  EXPECT_EQ(c.q, 1);
  EXPECT_FALSE(c.warnings.empty());
}

TEST(Classify, RegionsAreDisjoint) {
  Engine rng(3);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (double rho : {0.1, 0.5, 0.9, 1.0}) {
    const RegionSpec region(rho);
    for (int i = 0; i < 2000; ++i) {
      const Complex z(u(rng), u(rng));
      EXPECT_FALSE(region.in_lu(z) && region.in_st(z) && std::abs(std::abs(z) - rho) > 1e-9);
    }
  }
}

TEST(Split, DiagonalExample) {
  const auto s = split(VarCoefficients(mat({{0.5, 0.0}, {0.0, 0.95}}), 1), 1);
  EXPECT_NEAR(s.lambda_lu(0, 0), 0.95, 1e-14);
  EXPECT_NEAR(s.A(0, 0), 0.0, 1e-14);
  EXPECT_NEAR(s.R_lu(1, 0), 1.0, 1e-14);
  EXPECT_LT((reconstruct(s) - mat({{0.5, 0.0}, {0.0, 0.95}})).norm(), 1e-12);
}

TEST(Split, LowerTriangularExample) {
  const auto s = split(VarCoefficients(mat({{0.95, 0.0}, {0.45, 0.5}}), 1), 1);
  EXPECT_NEAR(s.lambda_lu(0, 0), 0.95, 1e-12);
  EXPECT_NEAR(s.A(0, 0), 1.0, 1e-12);
  EXPECT_TRUE(s.R_lu.isApprox(mat({{1.0}, {1.0}}), 1e-12));
}

TEST(Split, ZeroQPassthrough) {
  Engine rng(5);
  const Matrix stacked = qcvar::testing::random_normal(rng, 2, 4, 0.3);
  const VarCoefficients c(stacked, 2);
  const auto s = split(c, 0);
  EXPECT_EQ(s.A.size(), 0);
  EXPECT_EQ(s.lambda_lu.size(), 0);
  EXPECT_LT((reconstruct(s) - companion(c)).norm(), 1e-12 * companion(c).norm());
}

TEST(Split, ConjugatePairStraddlingTheCutFails) {
  // Roots 0.95 e^{±0.1i} and 0.3: q = 1 would cut the pair.
  const Complex z = std::polar(0.95, 0.1);
  const double a = z.real(), b = z.imag();
  Matrix phi = Matrix::Zero(3, 3);
  phi(0, 0) = 0.3;
  phi(1, 1) = a;
  phi(1, 2) = -b;
  phi(2, 1) = b;
  phi(2, 2) = a;
  EXPECT_EQ(kind_of([&] { split(VarCoefficients(phi, 1), 1); }), ErrorKind::separation);
  EXPECT_NO_THROW(split(VarCoefficients(phi, 1), 2));
}

TEST(Split, SingularNormalizationFails) {
  // The near-unity eigenvector is the first axis, so its last row is zero.
  EXPECT_EQ(kind_of([] { split(VarCoefficients(mat({{0.95, 0.0}, {0.0, 0.5}}), 1), 1); }),
            ErrorKind::normalization);
}

TEST(Split, InvariantsOnRandomInstances) {
  Engine rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + trial % 3, k = 1 + (trial / 3) % 3;
    const auto inst = random_instance(rng, p, k);
    const auto& s = inst.split;
    const Matrix F = companion(inst.coeffs);
    EXPECT_LE((F - reconstruct(s)).norm(), 1e-8 * F.norm());
    EXPECT_LE((s.big_L.transpose() * s.big_R - Matrix::Identity(k * p, k * p)).norm(), 1e-8);
    EXPECT_LE((s.R_lu.bottomRows(s.q) - Matrix::Identity(s.q, s.q)).norm(), 1e-12);
    EXPECT_LE((s.R_lu.topRows(p - s.q) - s.A).norm(), 1e-14);
    // R_lu Λᵏ − Σ Φᵢ R_lu Λ^{k−i} = 0
    Matrix resid = s.R_lu * matrix_power(s.lambda_lu, k);
    for (int i = 1; i <= k; ++i)
      resid -= inst.coeffs.lag(i) * s.R_lu * matrix_power(s.lambda_lu, k - i);
    EXPECT_LE(resid.norm(), 1e-8 * std::max(1.0, s.R_lu.norm()));
    // spectrum preserved
    EXPECT_LE(qcvar::testing::multiset_distance(qcvar::testing::eigenvalues(s.lambda()),
                                                qcvar::testing::eigenvalues(F)),
              1e-8);
    // the q largest roots sit in Λ_lu
    const auto lu = qcvar::testing::eigenvalues(s.lambda_lu);
    const auto all = roots(inst.coeffs).roots;
    for (const Complex z : lu) EXPECT_GE(std::abs(z), std::abs(all[s.q - 1]) - 1e-8);
  }
}

TEST(Split, BasisInvarianceOfA) {
  // A depends only on the subspace: recomputing from a rotated basis gives the same A.
  Engine rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = qcvar::testing::random_p_instance(rng, 4, 2, 2);
    const Matrix basis = inst.split.big_R_lu();
    const Matrix Q = qcvar::testing::random_normal(rng, 2, 2) + 3.0 * Matrix::Identity(2, 2);
    const auto [renorm, lam] =
        normalize_invariant_basis(basis * Q, Q.inverse() * inst.split.lambda_lu * Q);
    const Matrix A2 = renorm.bottomRows(4).topRows(2);
    EXPECT_LE((A2 - inst.split.A).norm(), 1e-8);
    EXPECT_LE((lam - inst.split.lambda_lu).norm(), 1e-8);
  }
}

TEST(StackedBasis, MatchesDefinition) {
  const Matrix A = mat({{0.3}});
  const Matrix L = mat({{0.97}});
  const Matrix B = stacked_lu_basis(A, L, 3);
  ASSERT_EQ(B.rows(), 6);
  EXPECT_NEAR(B(0, 0), 0.3 * 0.97 * 0.97, 1e-15);
  EXPECT_NEAR(B(1, 0), 0.97 * 0.97, 1e-15);
  EXPECT_NEAR(B(4, 0), 0.3, 1e-15);
  EXPECT_NEAR(B(5, 0), 1.0, 1e-15);
}

TEST(Lambda, ScalarFamily) {
  LambdaParam p{LambdaFamily::scalar, 1, {0.95}, 0};
  EXPECT_NEAR(lambda_materialize(p, 0.9)(0, 0), 0.95, 1e-15);
  LambdaParam p2{LambdaFamily::scalar, 3, {0.95}, 0};
  EXPECT_TRUE(lambda_materialize(p2, 0.9).isApprox(0.95 * Matrix::Identity(3, 3)));
}

TEST(Lambda, SymmetricZeroAngle) {
  LambdaParam p{LambdaFamily::symmetric, 2, {1.0, 0.95, 0.0}, 0};
  EXPECT_LT((lambda_materialize(p, 0.9) - mat({{1.0, 0.0}, {0.0, 0.95}})).norm(), 1e-15);
}

TEST(Lambda, SymmetricQuarterTurn) {
  LambdaParam p{LambdaFamily::symmetric, 2, {1.0, 0.9, std::numbers::pi / 4}, 0};
  EXPECT_LT((lambda_materialize(p, 0.9) - mat({{0.95, 0.05}, {0.05, 0.95}})).norm(), 1e-14);
}

TEST(Lambda, SymmetricAndNormalStructure) {
  Engine rng(4);
  std::uniform_real_distribution<double> ev(0.9, 1.0), ang(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    LambdaParam s{LambdaFamily::symmetric, 3, {ev(rng), ev(rng), ev(rng), ang(rng), ang(rng), ang(rng)}, 0};
    const Matrix S = lambda_materialize(s, 0.9);
    EXPECT_LT((S - S.transpose()).norm(), 1e-14);

    // complex pair with modulus in [0.9, 1]: re = m cos t, im = m sin t
    const double m = ev(rng), t = 0.05;
    LambdaParam n{LambdaFamily::normal, 3, {m * std::cos(t), m * std::sin(t), ev(rng), ang(rng), ang(rng), ang(rng)}, 1};
    const Matrix N = lambda_materialize(n, 0.9);
    EXPECT_LT((N * N.transpose() - N.transpose() * N).norm(), 1e-10);
    for (const Complex z : qcvar::testing::eigenvalues(N)) {
      EXPECT_GE(std::abs(z), 0.9 - 1e-12);
      EXPECT_LE(std::abs(z), 1.0 + 1e-12);
    }
  }
}

TEST(Lambda, RotationOrderIsLexicographic) {
  const double a = 0.3, b = -0.7, c = 1.1;
  const double angles[] = {a, b, c};
  auto plane = [](int i, int j, double t) {
    Matrix G = Matrix::Identity(3, 3);
    G(i, i) = std::cos(t);
    G(j, j) = std::cos(t);
    G(i, j) = -std::sin(t);
    G(j, i) = std::sin(t);
    return G;
  };
  const Matrix expected = plane(0, 1, a) * plane(0, 2, b) * plane(1, 2, c);
  EXPECT_LT((rotation_product(3, angles) - expected).norm(), 1e-14);
}

TEST(Lambda, DomainErrors) {
  LambdaParam low{LambdaFamily::scalar, 1, {0.85}, 0};
  EXPECT_EQ(kind_of([&] { lambda_materialize(low, 0.9); }), ErrorKind::domain);
  LambdaParam high{LambdaFamily::symmetric, 2, {1.01, 0.95, 0.0}, 0};
  EXPECT_EQ(kind_of([&] { lambda_materialize(high, 0.9); }), ErrorKind::domain);
  LambdaParam wrong{LambdaFamily::symmetric, 2, {1.0, 0.95}, 0};
  EXPECT_EQ(kind_of([&] { lambda_materialize(wrong, 0.9); }), ErrorKind::input);
}

TEST(HalfLife, AnchorsFromTheLiterature) {
  EXPECT_NEAR(half_life_to_radius(8.0), 0.917, 5e-4);
  EXPECT_NEAR(half_life_to_radius(10.0), 0.933, 5e-4);
  EXPECT_DOUBLE_EQ(radius_to_half_life(0.5), 1.0);
}

TEST(HalfLife, MutualInverse) {
  for (double h : {0.5, 1.0, 3.0, 8.0, 10.0, 40.0})
    EXPECT_NEAR(radius_to_half_life(half_life_to_radius(h)), h, 1e-10 * h);
  EXPECT_TRUE(std::isinf(radius_to_half_life(1.0)));
  EXPECT_EQ(kind_of([] { half_life_to_radius(-1.0); }), ErrorKind::domain);
}

TEST(Family, ParseRoundTrip) {
  for (auto f : {LambdaFamily::scalar, LambdaFamily::symmetric, LambdaFamily::normal})
    EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_EQ(kind_of([] { parse_family("diagonal"); }), ErrorKind::input);
}
