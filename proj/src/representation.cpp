#include "qcvar/representation.hpp"

#include "qcvar/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qcvar {

ImpulseResponse irf(const SpectralSplit& split, int s) {
  if (s < 0) throw Error(ErrorKind::input, "IRF horizon must be nonnegative");
  const int p = split.p;
  ImpulseResponse out;
  out.horizon = s;
  if (s == 0) {
    out.value = Matrix::Identity(p, p);
    out.lu_part = Matrix::Zero(p, p);
    out.st_part = out.value;
    return out;
  }
  const int e = split.k - 1 + s;
  out.lu_part = split.R_lu * matrix_power(split.lambda_lu, e) * split.L_lu.transpose();
  out.st_part = split.R_st * matrix_power(split.lambda_st, e) * split.L_st.transpose();
  out.value = out.lu_part + out.st_part;
  return out;
}

Matrix qcs_basis(const Matrix& A) {
  const auto r = A.rows(), q = A.cols();
  Matrix beta(r + q, r);
  beta.topRows(r).setIdentity();
  beta.bottomRows(q) = -A.transpose();
  return beta;
}

Matrix qcs_basis(const SpectralSplit& split) { return qcs_basis(split.A); }

std::vector<double> decay_profile(const SpectralSplit& split, const Vector& b, int s_max) {
  if (b.size() != split.p) throw Error(ErrorKind::input, "direction has the wrong length");
  if (b.norm() == 0.0) throw Error(ErrorKind::input, "direction must be nonzero");
  // bᵀ R Λ^{k−1+s} Lᵀ, advanced one power of Λ at a time.
  Eigen::RowVectorXd lu = b.transpose() * split.R_lu * matrix_power(split.lambda_lu, split.k - 1);
  Eigen::RowVectorXd st = b.transpose() * split.R_st * matrix_power(split.lambda_st, split.k - 1);
  std::vector<double> out;
  out.reserve(s_max);
  for (int s = 1; s <= s_max; ++s) {
    lu = lu * split.lambda_lu;
    st = st * split.lambda_st;
    out.push_back((lu * split.L_lu.transpose() + st * split.L_st.transpose()).norm());
  }
  return out;
}

StateDecomposition state_decompose(const SpectralSplit& split, const Matrix& x, const Matrix& eps) {
  const int p = split.p, k = split.k, q = split.q;
  if (x.cols() != p || eps.cols() != p)
    throw Error(ErrorKind::input, "paths must have p columns");
  if (x.rows() != eps.rows())
    throw Error(ErrorKind::input, "x and eps paths have different lengths");
  const auto n = x.rows();
  const int m = k * p - q;

  StateDecomposition out;
  out.phi_lu = split.R_lu * matrix_power(split.lambda_lu, k);
  out.phi_st = split.R_st * matrix_power(split.lambda_st, k);
  out.z_lu.resize(n, q);
  out.z_st.resize(n, m);
  out.residual.resize(n, p);

  const Matrix Llu_t = split.big_L_lu().transpose();
  const Matrix Lst_t = split.big_L_st().transpose();
  Vector stacked = Vector::Zero(k * p);
  Vector zlu_prev = Vector::Zero(q), zst_prev = Vector::Zero(m);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (k > 1) stacked.tail((k - 1) * p) = stacked.head((k - 1) * p).eval();
    stacked.head(p) = x.row(t).transpose();
    const Vector zlu = Llu_t * stacked;
    const Vector zst = Lst_t * stacked;
    out.z_lu.row(t) = zlu.transpose();
    out.z_st.row(t) = zst.transpose();
    out.residual.row(t) =
        (x.row(t).transpose() - out.phi_lu * zlu_prev - out.phi_st * zst_prev - eps.row(t).transpose())
            .transpose();
    zlu_prev = zlu;
    zst_prev = zst;
  }
  out.max_residual = n > 0 ? out.residual.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

namespace {

// Shifted systems (T_jj I − Λ_st) from the complex Schur form of Λ_lu.
struct KernelSolver {
  Eigen::MatrixXcd U;
  Eigen::MatrixXcd T;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> shifted;

  KernelSolver(const Matrix& lambda_lu, const Matrix& lambda_st) {
    const auto q = lambda_lu.rows(), m = lambda_st.rows();
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(lambda_lu.cast<Complex>());
    if (schur.info() != Eigen::Success)
      throw Error(ErrorKind::numerical, "complex Schur decomposition of the near-unity block failed");
    U = schur.matrixU();
    T = schur.matrixT();
    const Eigen::MatrixXcd st = lambda_st.cast<Complex>();
    const double scale = std::max(1.0, lambda_st.norm() + lambda_lu.norm());
    for (Eigen::Index j = 0; j < q; ++j) {
      Eigen::MatrixXcd S = T(j, j) * Eigen::MatrixXcd::Identity(m, m) - st;
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
      const auto& sv = svd.singularValues();
      if (m > 0 && sv(m - 1) <= 1e-13 * scale)
        throw Error(ErrorKind::separation,
                    "near-unity and stable blocks share an eigenvalue; the kernel is singular");
      shifted.emplace_back(S);
    }
  }

  Matrix solve(const Matrix& Y) const {
    const auto q = T.rows();
    const Eigen::MatrixXcd Yt = Y.cast<Complex>() * U;
    Eigen::MatrixXcd Xt(Y.rows(), q);
    for (Eigen::Index j = 0; j < q; ++j) {
      Eigen::VectorXcd rhs = Yt.col(j);
      for (Eigen::Index i = 0; i < j; ++i) rhs -= T(i, j) * Xt.col(i);
      Xt.col(j) = shifted[j].solve(rhs);
    }
    return (Xt * U.adjoint()).real();
  }
};

}  // namespace

Matrix solve_lu_st_kernel(const Matrix& lambda_lu, const Matrix& lambda_st, const Matrix& Y) {
  return KernelSolver(lambda_lu, lambda_st).solve(Y);
}

Matrix b_matrix(const SpectralSplit& split) {
  const int p = split.p, q = split.q;
  const KernelSolver solver(split.lambda_lu, split.lambda_st);
  Matrix B(p * q, p * q);
  for (int c = 0; c < p * q; ++c) {
    Matrix M = Matrix::Zero(p, q);
    M(c % p, c / p) = 1.0;
    const Matrix X = solver.solve(split.L_st.transpose() * M);
    B.col(c) = vec(split.R_st * X);
  }
  return B;
}

PerturbationJacobians jacobians(const SpectralSplit& split) {
  const int p = split.p, q = split.q;
  PerturbationJacobians out;
  out.B = b_matrix(split);
  const Matrix Iq = Matrix::Identity(q, q);
  out.J_A = kron(Iq, qcs_basis(split).transpose()) * out.B;
  Matrix Gt = Matrix::Zero(q, p);
  Gt.rightCols(q).setIdentity();
  const Matrix commutator =
      kron(split.lambda_lu.transpose(), Iq) - kron(Iq, split.lambda_lu);
  out.J_lambda = commutator * kron(Iq, Gt) * out.B + kron(Iq, split.L_lu.transpose());
  return out;
}

Matrix adjustment_alpha(const VarCoefficients& coeffs, const Matrix& beta) {
  if (beta.rows() != coeffs.p()) throw Error(ErrorKind::input, "beta must have p rows");
  const Matrix btb = beta.transpose() * beta;
  return coeffs.at_unity() * beta * btb.inverse();
}

}  // namespace qcvar
