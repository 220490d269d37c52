#include "qcvar/dgp.hpp"
#include "qcvar/representation.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qcvar;
using qcvar::testing::companion_oracle;
using qcvar::testing::irf_oracle;
using qcvar::testing::kind_of;
using qcvar::testing::mat;
using qcvar::testing::random_instance;
using qcvar::testing::random_normal;
using qcvar::testing::random_p_instance;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(Irf, ScalarPower) {
  const auto sp = split(VarCoefficients(mat({{0.9}}), 1), 1);
  EXPECT_NEAR(irf(sp, 3).value(0, 0), 0.729, 1e-12);
}

TEST(Irf, HorizonZeroIsIdentity) {
  Engine rng(4);
  const auto inst = random_instance(rng, 3, 2);
  const auto r = irf(inst.split, 0);
  EXPECT_EQ(r.value, Matrix::Identity(3, 3));
  EXPECT_EQ(r.lu_part, Matrix::Zero(3, 3));
  EXPECT_EQ(kind_of([&] { irf(inst.split, -1); }), ErrorKind::input);
}

TEST(Irf, OneStepIsTheCoefficient) {
  Engine rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, 3, 1);
    EXPECT_LT(max_abs(irf(inst.split, 1).value - inst.coeffs.stacked()), 1e-10);
  }
}

TEST(Irf, MatchesCompanionPowerAndRecursion) {
  Engine rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    const int p = 2 + rep % 3, k = 1 + rep % 2;
    const auto inst = random_p_instance(rng, p, k, 1 + rep % (p - 1));
    const Matrix F = companion_oracle(inst.coeffs.stacked(), k);
    Matrix Fs = Matrix::Identity(k * p, k * p);
    for (int s = 1; s <= 100; ++s) {
      Fs = Fs * F;
      const auto r = irf(inst.split, s);
      const double scale = 1.0 + max_abs(r.value);
      EXPECT_LT(max_abs(r.value - Fs.topLeftCorner(p, p)), 1e-8 * scale) << rep << " s=" << s;
      EXPECT_LT(max_abs(r.value - r.lu_part - r.st_part), 1e-10 * scale);
      if (s % 25 == 0)
        EXPECT_LT(max_abs(r.value - irf_oracle(inst.coeffs.stacked(), k, s)), 1e-8 * scale);
    }
  }
}

TEST(QcsBasis, Examples) {
  EXPECT_EQ(qcs_basis(mat({{0}})).transpose(), mat({{1, 0}}));
  EXPECT_EQ(qcs_basis(mat({{1}})).transpose(), mat({{1, -1}}));
  const Matrix beta = qcs_basis(mat({{0.5}, {2}}));
  EXPECT_EQ(beta.transpose(), mat({{1, 0, -0.5}, {0, 1, -2}}));
  EXPECT_EQ(beta.transpose() * mat({{0.5}, {2}, {1}}), Matrix::Zero(2, 1));
}

TEST(QcsBasis, AnnihilatesLuBasis) {
  Engine rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = random_instance(rng, 2 + rep % 3, 1 + rep % 2);
    const Matrix beta = qcs_basis(inst.split);
    EXPECT_LE(max_abs(beta.transpose() * inst.split.R_lu), 1e-10);
    if (inst.split.r() > 0) EXPECT_EQ(Eigen::FullPivLU<Matrix>(beta).rank(), inst.split.r());
  }
}

TEST(DecayProfile, DiagonalCase) {
  const auto sp = split(VarCoefficients(mat({{0.5, 0}, {0, 0.95}}), 1), 1);
  ASSERT_NEAR(sp.A(0, 0), 0.0, 1e-14);
  const Vector b = qcs_basis(sp).col(0);
  const auto in_qcs = decay_profile(sp, b, 20);
  ASSERT_EQ(in_qcs.size(), 20U);
  EXPECT_NEAR(in_qcs[19], std::pow(0.5, 20), 1e-15);
  const auto along_lu = decay_profile(sp, sp.R_lu.col(0), 20);
  EXPECT_NEAR(along_lu[19], std::pow(0.95, 20), 1e-12);
  EXPECT_EQ(kind_of([&] { decay_profile(sp, Vector::Zero(2), 5); }), ErrorKind::input);
  EXPECT_EQ(kind_of([&] { decay_profile(sp, Vector::Ones(3), 5); }), ErrorKind::input);
}

TEST(DecayProfile, QcsDirectionsDecayFasterThanOthers) {
  // Sampled property: a handful of directions outside the QCS per instance.
  Engine rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 3, q = 1 + rep % 2;
    const Matrix R_st = random_normal(rng, p, p - q);
    const Matrix lambda_st = 0.6 * Matrix::Identity(p - q, p - q);
    const Matrix A = random_normal(rng, p - q, q);
    const auto coeffs = build_var_from_parts(A, qcvar::testing::random_symmetric_lambda(rng, q, 0.97, 0.99),
                                             R_st, lambda_st, 1);
    const auto sp = split(coeffs, q);
    const Matrix beta = qcs_basis(sp);
    for (int c = 0; c < 3; ++c) {
      const Vector other = random_normal(rng, p, 1).col(0);
      const auto num = decay_profile(sp, beta.col(0), 200);
      const auto den = decay_profile(sp, other, 200);
      const double r50 = num[49] / den[49], r100 = num[99] / den[99], r200 = num[199] / den[199];
      EXPECT_LT(r100, r50);
      EXPECT_LT(r200, r100);
      EXPECT_LT(r200, 1e-20);
    }
  }
}

TEST(StateDecompose, ZeroNoiseGivesZeroStates) {
  Engine rng(9);
  const auto inst = random_p_instance(rng, 3, 2, 1);
  const Matrix zero = Matrix::Zero(50, 3);
  const auto d = state_decompose(inst.split, zero, zero);
  EXPECT_EQ(max_abs(d.z_lu), 0.0);
  EXPECT_EQ(max_abs(d.z_st), 0.0);
  EXPECT_EQ(kind_of([&] { state_decompose(inst.split, zero, Matrix::Zero(49, 3)); }),
            ErrorKind::input);
}

TEST(StateDecompose, SimulatedIdentityAndStateRecursion) {
  Engine rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    const auto inst = random_p_instance(rng, 3, 2, 1 + rep % 2);
    DgpSpec spec{inst.coeffs, Matrix::Identity(3, 3), Vector::Zero(3), Vector::Zero(3), 500};
    const auto path = simulate(spec, 100 + rep);
    const auto d = state_decompose(inst.split, path.x, path.eps);
    EXPECT_LE(d.max_residual, 1e-10 * (1 + max_abs(path.x)));
    // z_t = Λ z_{t−1} + 𝐋ᵀ e₁ ε_t in each block
    const Matrix Llu = inst.split.L_lu, Lst = inst.split.L_st;
    double worst = 0.0;
    for (Eigen::Index t = 1; t < 500; ++t) {
      const Vector elu = d.z_lu.row(t).transpose() -
                         inst.split.lambda_lu * d.z_lu.row(t - 1).transpose() -
                         Llu.transpose() * path.eps.row(t).transpose();
      const Vector est = d.z_st.row(t).transpose() -
                         inst.split.lambda_st * d.z_st.row(t - 1).transpose() -
                         Lst.transpose() * path.eps.row(t).transpose();
      worst = std::max({worst, elu.cwiseAbs().maxCoeff(), est.cwiseAbs().maxCoeff()});
    }
    EXPECT_LE(worst, 1e-9 * (1 + max_abs(d.z_lu) + max_abs(d.z_st)));
  }
}

TEST(StateDecompose, SingleLagStatesAreLTransposeX) {
  Engine rng(11);
  const auto inst = random_p_instance(rng, 2, 1, 1);
  DgpSpec spec{inst.coeffs, Matrix::Identity(2, 2), Vector::Zero(2), Vector::Zero(2), 100};
  const auto path = simulate(spec, 3);
  const auto d = state_decompose(inst.split, path.x, path.eps);
  EXPECT_LT(max_abs(d.z_lu - path.x * inst.split.L_lu), 1e-12 * (1 + max_abs(path.x)));
  EXPECT_LT(max_abs(d.phi_lu * d.z_lu.row(10).transpose() + d.phi_st * d.z_st.row(10).transpose() -
                    inst.coeffs.stacked() * path.x.row(10).transpose()),
            1e-10 * (1 + max_abs(path.x)));
}

TEST(BMatrix, ScalarKernel) {
  const Matrix R_st = mat({{1}, {0}});
  const auto coeffs = build_var_from_parts(mat({{1}}), mat({{1}}), R_st, mat({{0.5}}), 1);
  const auto sp = split(coeffs, 1);
  const Matrix expected = sp.R_st * sp.L_st.transpose() / (1 - 0.5);
  EXPECT_LT(max_abs(b_matrix(sp) - expected), 1e-12);
}

TEST(BMatrix, AgreesWithDenseKroneckerSolve) {
  Engine rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    const int p = 2 + rep % 3, k = 1 + rep % 2, q = 1 + rep % (p - 1);
    const auto inst = random_p_instance(rng, p, k, q);
    const auto& sp = inst.split;
    const int m = k * p - q;
    const Matrix kernel = kron(sp.lambda_lu.transpose(), Matrix::Identity(m, m)) -
                          kron(Matrix::Identity(q, q), sp.lambda_st);
    const Eigen::FullPivLU<Matrix> lu(kernel);
    const Matrix B = b_matrix(sp);
    for (int c = 0; c < 3; ++c) {
      const Matrix M = random_normal(rng, p, q);
      const Matrix X = unvec(lu.solve(vec(sp.L_st.transpose() * M)), m, q);
      EXPECT_LT((X * sp.lambda_lu - sp.lambda_st * X - sp.L_st.transpose() * M).norm(), 1e-8);
      EXPECT_LT((B * vec(M) - vec(sp.R_st * X)).norm(), 1e-8 * (1 + B.norm()));
    }
  }
}

TEST(BMatrix, SharedEigenvalueIsASeparationError) {
  EXPECT_EQ(kind_of([] { solve_lu_st_kernel(mat({{0.5}}), mat({{0.5}}), mat({{1}})); }),
            ErrorKind::separation);
}

TEST(Jacobians, ClosedFormAtUnity) {
  Engine rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 2 + rep % 3, k = 1 + rep % 2, q = 1 + rep % (p - 1);
    const Matrix A = random_normal(rng, p - q, q);
    const auto coeffs = build_var(A, Matrix::Identity(q, q), 1000 + rep, k);
    const auto sp = split(coeffs, q);
    const auto J = jacobians(sp);
    const int m = k * p - q;
    const Matrix Iq = Matrix::Identity(q, q);
    const Matrix inner = sp.R_st * (Matrix::Identity(m, m) - sp.lambda_st).inverse() * sp.L_st.transpose();
    EXPECT_LT(max_abs(J.B - kron(Iq, inner)), 1e-10 * (1 + max_abs(J.B)));
    EXPECT_LT(max_abs(J.J_A - kron(Iq, qcs_basis(sp).transpose() * inner)), 1e-10 * (1 + max_abs(J.J_A)));
    EXPECT_LT(max_abs(J.J_lambda - kron(Iq, sp.L_lu.transpose())), 1e-10 * (1 + max_abs(J.J_lambda)));
    Matrix stacked(J.J_A.rows() + J.J_lambda.rows(), p * q);
    stacked << J.J_A, J.J_lambda;
    EXPECT_EQ(stacked.rows(), p * q);
    EXPECT_GT(inverse_condition(stacked), 1e-12);
  }
}

TEST(Jacobians, MatchCentralFiniteDifferences) {
  Engine rng(14);
  const double h = 1e-6;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 2 + rep % 3, k = 1 + (rep / 3) % 2, q = 1 + rep % (p - 1);
    const auto inst = random_p_instance(rng, p, k, q, 0.9, 0.99);
    const auto& sp = inst.split;
    const auto J = jacobians(sp);
    Matrix dphi = random_normal(rng, p, k * p);
    dphi /= dphi.norm();
    const Vector dir = vec(dphi * sp.big_R_lu());
    const auto plus = split(VarCoefficients(inst.coeffs.stacked() + h * dphi, k), q);
    const auto minus = split(VarCoefficients(inst.coeffs.stacked() - h * dphi, k), q);
    const Vector fdA = (vec(plus.A) - vec(minus.A)) / (2 * h);
    const Vector fdL = (vec(plus.lambda_lu) - vec(minus.lambda_lu)) / (2 * h);
    worst = std::max(worst, (J.J_A * dir - fdA).cwiseAbs().maxCoeff());
    worst = std::max(worst, (J.J_lambda * dir - fdL).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Jacobians, StableDirectionPerturbationsLeaveLuBlockExactly) {
  Engine rng(15);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 2 + rep % 3, k = 1 + rep % 2, q = 1 + rep % (p - 1);
    const auto inst = random_p_instance(rng, p, k, q, 0.9, 0.99);
    const auto& sp = inst.split;
    Matrix M = random_normal(rng, p, k * p - q);
    Matrix dphi = M * sp.big_L_st().transpose();
    dphi *= 1e-2 / dphi.norm();
    EXPECT_LT(max_abs(dphi * sp.big_R_lu()), 1e-12);
    const auto moved = split(VarCoefficients(inst.coeffs.stacked() + dphi, k), q);
    EXPECT_LT(max_abs(moved.A - sp.A), 1e-8) << rep;
    EXPECT_LT(max_abs(moved.lambda_lu - sp.lambda_lu), 1e-8) << rep;
  }
}

TEST(AdjustmentAlpha, DiagonalCase) {
  const VarCoefficients coeffs(mat({{0.5, 0}, {0, 1}}), 1);
  const Matrix alpha = adjustment_alpha(coeffs, mat({{1}, {0}}));
  EXPECT_LT(max_abs(alpha - mat({{0.5}, {0}})), 1e-15);
  EXPECT_EQ(kind_of([&] { adjustment_alpha(coeffs, mat({{1}, {0}, {0}})); }), ErrorKind::input);
}

TEST(AdjustmentAlpha, RecoversLoadingSpanOfCointegratedVar) {
  Engine rng(16);
  const int p = 4, r = 2;
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = random_normal(rng, p, r, 0.2), b = random_normal(rng, p, r);
    const VarCoefficients coeffs(Matrix::Identity(p, p) + a * b.transpose(), 1);
    const Matrix alpha = adjustment_alpha(coeffs, b);
    // same column space: projecting alpha onto span(a) leaves nothing
    const Matrix P = a * (a.transpose() * a).inverse() * a.transpose();
    EXPECT_LT(max_abs(alpha - P * alpha), 1e-10);
    EXPECT_EQ(Eigen::FullPivLU<Matrix>(alpha).rank(), r);
    // and a change of basis for β leaves the span unchanged
    const Matrix Mb = random_normal(rng, r, r);
    const Matrix alpha2 = adjustment_alpha(coeffs, b * Mb);
    const Matrix P2 = alpha * (alpha.transpose() * alpha).inverse() * alpha.transpose();
    EXPECT_LT(max_abs(alpha2 - P2 * alpha2), 1e-9);
  }
}
