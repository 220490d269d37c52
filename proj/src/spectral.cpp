#include "qcvar/spectral.hpp"

#include "qcvar/error.hpp"

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qcvar {

VarCoefficients::VarCoefficients(Matrix stacked, int k) : stacked_(std::move(stacked)), k_(k) {
  if (k_ < 1) throw Error(ErrorKind::input, "lag order k must be positive");
  if (stacked_.rows() < 1) throw Error(ErrorKind::input, "series dimension p must be positive");
  if (stacked_.cols() != stacked_.rows() * k_) {
    std::ostringstream msg;
    msg << "coefficient matrix is " << stacked_.rows() << "x" << stacked_.cols() << ", expected "
        << stacked_.rows() << "x" << stacked_.rows() * k_;
    throw Error(ErrorKind::input, msg.str());
  }
  if (!stacked_.allFinite()) throw Error(ErrorKind::input, "coefficients must be finite");
}

VarCoefficients VarCoefficients::from_blocks(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw Error(ErrorKind::input, "at least one lag matrix is required");
  const auto p = blocks.front().rows();
  Matrix stacked(p, p * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != p || blocks[i].cols() != p)
      throw Error(ErrorKind::input, "all lag matrices must be p x p");
    stacked.middleCols(static_cast<Eigen::Index>(i) * p, p) = blocks[i];
  }
  return VarCoefficients(std::move(stacked), static_cast<int>(blocks.size()));
}

Matrix VarCoefficients::lag(int lag) const {
  if (lag < 1 || lag > k_) throw Error(ErrorKind::input, "lag index out of range");
  return stacked_.middleCols((lag - 1) * p(), p());
}

Matrix VarCoefficients::at_unity() const {
  Matrix out = Matrix::Identity(p(), p());
  for (int i = 1; i <= k_; ++i) out -= lag(i);
  return out;
}

void sort_roots(std::vector<Complex>& roots) {
  std::stable_sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

RegionSpec::RegionSpec(double radius) : rho(radius) {
  if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorKind::domain, "rho must lie in (0, 1]");
}

namespace {

constexpr double kBoundaryTol = 1e-10;

struct Schur {
  Matrix T;
  Matrix U;
  std::vector<double> wr;
  std::vector<double> wi;
};

Schur real_schur(const Matrix& F) {
  const auto n = static_cast<lapack_int>(F.rows());
  Schur s{F, Matrix(n, n), std::vector<double>(n), std::vector<double>(n)};
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, s.T.data(), n,
                                        &sdim, s.wr.data(), s.wi.data(), s.U.data(), n);
  if (info != 0)
    throw Error(ErrorKind::numerical, "real Schur decomposition failed (dgees info=" +
                                          std::to_string(info) + ")");
  return s;
}

}  // namespace

bool RegionSpec::in_lu(Complex z) const {
  return std::abs(z) <= 1.0 + kBoundaryTol && std::abs(1.0 - z) <= 1.0 - rho + kBoundaryTol;
}

bool RegionSpec::in_st(Complex z) const { return std::abs(z) < rho; }

Matrix companion(const VarCoefficients& coeffs) {
  const int p = coeffs.p(), n = coeffs.dim();
  Matrix F = Matrix::Zero(n, n);
  F.topRows(p) = coeffs.stacked();
  if (n > p) F.bottomLeftCorner(n - p, n - p).setIdentity();
  return F;
}

RootSet roots(const VarCoefficients& coeffs) {
  const Schur s = real_schur(companion(coeffs));
  RootSet out;
  out.roots.reserve(s.wr.size());
  for (std::size_t i = 0; i < s.wr.size(); ++i) out.roots.emplace_back(s.wr[i], s.wi[i]);
  sort_roots(out.roots);
  return out;
}

Classification classify(const RootSet& rootset, const RegionSpec& region) {
  Classification out;
  std::vector<std::string> stray;
  for (std::size_t i = 0; i < rootset.roots.size(); ++i) {
    const Complex z = rootset.roots[i];
    const double mod = std::abs(z), dist = std::abs(1.0 - z);
    RootRegion where = RootRegion::neither;
    if (region.in_lu(z)) {
      where = RootRegion::lu;
      ++out.q;
      if (std::abs(mod - 1.0) <= kBoundaryTol || std::abs(dist - (1.0 - region.rho)) <= kBoundaryTol)
        out.warnings.push_back("root " + std::to_string(i + 1) +
                               " lies on the boundary of the near-unity region");
    } else if (region.in_st(z)) {
      where = RootRegion::st;
      if (std::abs(mod - region.rho) <= kBoundaryTol)
        out.warnings.push_back("root " + std::to_string(i + 1) +
                               " lies on the boundary of the stable region");
    } else {
      std::ostringstream s;
      s << "#" << (i + 1) << " (" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
        << "i, |z|=" << mod << ", |1-z|=" << dist << ")";
      stray.push_back(s.str());
    }
    out.regions.push_back(where);
  }
  if (!stray.empty()) {
    std::ostringstream msg;
    msg << "roots outside both spectral regions at rho=" << region.rho << ":";
    for (const auto& s : stray) msg << ' ' << s;
    throw Error(ErrorKind::classification, msg.str());
  }
  return out;
}

Matrix stacked_lu_basis(const Matrix& A, const Matrix& lambda_lu, int k) {
  const auto q = lambda_lu.rows(), r = A.rows(), p = r + q;
  Matrix R(p, q);
  R.topRows(r) = A;
  R.bottomRows(q).setIdentity();
  Matrix out(k * p, q);
  Matrix block = R;  // R Λ^{k−i} for i = k, k−1, …, 1
  for (int i = k; i >= 1; --i) {
    out.middleRows((i - 1) * p, p) = block;
    if (i > 1) block = block * lambda_lu;
  }
  return out;
}

std::pair<Matrix, Matrix> normalize_invariant_basis(const Matrix& basis, const Matrix& lambda,
                                                    double tol) {
  const auto q = basis.cols();
  if (q == 0) return {basis, lambda};
  const Matrix M = basis.bottomRows(q);
  Eigen::JacobiSVD<Matrix> svd(M);
  const double smin = svd.singularValues()(q - 1);
  const double scale = std::max(1.0, basis.colwise().norm().maxCoeff());
  if (smin <= tol * scale)
    throw Error(ErrorKind::normalization,
                "the last q rows of the near-unity basis are singular; reorder the series so "
                "that the quasi-cointegrating space has no vector whose first r entries all vanish");
  const Matrix Minv = M.inverse();
  Matrix normalized = basis * Minv;
  normalized.bottomRows(q).setIdentity();
  return {normalized, M * lambda * Minv};
}

Matrix SpectralSplit::R() const {
  Matrix out(p, k * p);
  out << R_lu, R_st;
  return out;
}

Matrix SpectralSplit::L() const {
  Matrix out(p, k * p);
  out << L_lu, L_st;
  return out;
}

SpectralSplit split(const VarCoefficients& coeffs, int q, const SplitOptions& options) {
  const int p = coeffs.p(), k = coeffs.k(), n = coeffs.dim();
  if (q < 0 || q > p)
    throw Error(ErrorKind::input, "q must lie in [0, p]; got " + std::to_string(q));

  Schur s = real_schur(companion(coeffs));

  SpectralSplit out;
  out.p = p;
  out.k = k;
  out.q = q;
  for (int i = 0; i < n; ++i) out.roots.roots.emplace_back(s.wr[i], s.wi[i]);
  sort_roots(out.roots.roots);

  std::vector<lapack_logical> select(n, 0);
  if (q > 0 && q < n) {
    const double big = std::abs(out.roots.roots[q - 1]);
    const double small = std::abs(out.roots.roots[q]);
    const double gap = (big - small) / std::max(1.0, big);
    if (!(gap > options.separation_tol)) {
      std::ostringstream msg;
      msg << "roots " << q << " and " << q + 1 << " are not separated in modulus (|λ_q|=" << big
          << ", |λ_q+1|=" << small << ")";
      if (out.roots.roots[q - 1] == std::conj(out.roots.roots[q]) &&
          out.roots.roots[q - 1].imag() != 0.0)
        msg << "; they form a complex-conjugate pair straddling the split";
      throw Error(ErrorKind::separation, msg.str());
    }
    const double threshold = 0.5 * (big + small);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      select[i] = std::hypot(s.wr[i], s.wi[i]) > threshold ? 1 : 0;
      count += select[i];
    }
    if (count != q) throw Error(ErrorKind::separation, "could not isolate exactly q roots");
  } else if (q == n) {
    std::fill(select.begin(), select.end(), 1);
  }

  if (q > 0 && q < n) {
    lapack_int m = 0;
    double cond_s = 0.0, cond_sep = 0.0;
    // The high-level LAPACKE wrapper hands dtrsen a null iwork for job 'N',
    // which the routine still writes to, so supply the workspace directly.
    std::vector<double> work(std::max<lapack_int>(1, n));
    std::vector<lapack_int> iwork(1);
    const lapack_int info = LAPACKE_dtrsen_work(
        LAPACK_COL_MAJOR, 'N', 'V', select.data(), n, s.T.data(), n, s.U.data(), n, s.wr.data(),
        s.wi.data(), &m, &cond_s, &cond_sep, work.data(), static_cast<lapack_int>(work.size()),
        iwork.data(), 1);
    if (info != 0)
      throw Error(ErrorKind::separation,
                  "reordering of the Schur form failed (dtrsen info=" + std::to_string(info) + ")");
  }

  const int m = n - q;
  const Matrix U1 = s.U.leftCols(q);
  const Matrix U2 = s.U.rightCols(m);
  const Matrix T11 = s.T.topLeftCorner(q, q);
  const Matrix T22 = s.T.bottomRightCorner(m, m);

  // Decouple the blocks: T11 X − X T22 = −T12.
  Matrix X = -s.T.topRightCorner(q, m);
  if (q > 0 && m > 0) {
    double scale = 1.0;
    const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'N', 'N', -1, q, m, T11.data(), q,
                                           T22.data(), m, X.data(), q, &scale);
    if (info < 0 || scale == 0.0)
      throw Error(ErrorKind::numerical, "Sylvester solve for the block decoupling failed");
    if (info == 1)
      throw Error(ErrorKind::separation,
                  "near-unity and stable blocks share (nearly) common eigenvalues");
    X /= scale;
  }

  Matrix M = Matrix::Identity(q, q);
  if (q > 0) {
    auto [basis, lam] = normalize_invariant_basis(U1, T11, options.normalization_tol);
    M = U1.bottomRows(q);
    out.lambda_lu = lam;
    out.big_R = Matrix(n, n);
    out.big_R.leftCols(q) = basis;
  } else {
    out.lambda_lu = Matrix(0, 0);
    out.big_R = Matrix(n, n);
  }
  out.big_R.rightCols(m) = U1 * X + U2;
  out.lambda_st = T22;

  // 𝐑 = U [[M⁻¹, X], [0, I]]  ⇒  𝐋 = (𝐑⁻¹)ᵀ = U [[Mᵀ, 0], [−Xᵀ Mᵀ, I]].
  Matrix inner = Matrix::Zero(n, n);
  inner.topLeftCorner(q, q) = M.transpose();
  inner.bottomLeftCorner(m, q) = -X.transpose() * M.transpose();
  inner.bottomRightCorner(m, m).setIdentity();
  out.big_L = s.U * inner;

  const Matrix R = out.big_R.bottomRows(p);
  out.R_lu = R.leftCols(q);
  out.R_st = R.rightCols(m);
  out.A = out.R_lu.topRows(p - q);
  const Matrix L = out.big_L.topRows(p);
  out.L_lu = L.leftCols(q);
  out.L_st = L.rightCols(m);

  if (q > 0) {
    Eigen::EigenSolver<Matrix> es(out.lambda_lu);
    if (es.info() == Eigen::Success) {
      const double rc = [&] {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        return sv(sv.size() - 1) / sv(0);
      }();
      if (!(rc * options.diagonalisability_warn >= 1.0))
        out.warnings.push_back(
            "near-unity block is close to defective (eigenvector condition number above 1e6)");
    }
  }
  return out;
}

Matrix reconstruct(const SpectralSplit& split) {
  return split.big_R * split.lambda() * split.big_L.transpose();
}

const char* to_string(LambdaFamily family) noexcept {
  switch (family) {
    case LambdaFamily::scalar: return "scalar";
    case LambdaFamily::symmetric: return "symmetric";
    case LambdaFamily::normal: return "normal";
  }
  return "unknown";
}

LambdaFamily parse_family(const std::string& name) {
  if (name == "scalar") return LambdaFamily::scalar;
  if (name == "symmetric") return LambdaFamily::symmetric;
  if (name == "normal") return LambdaFamily::normal;
  throw Error(ErrorKind::input, "unknown lambda family '" + name + "'");
}

std::size_t LambdaParam::expected_size() const {
  if (family == LambdaFamily::scalar) return 1;
  return static_cast<std::size_t>(q) + static_cast<std::size_t>(q * (q - 1) / 2);
}

Matrix rotation_product(int q, std::span<const double> angles) {
  if (angles.size() != static_cast<std::size_t>(q * (q - 1) / 2))
    throw Error(ErrorKind::input, "expected q(q-1)/2 rotation angles");
  Matrix Q = Matrix::Identity(q, q);
  std::size_t next = 0;
  for (int i = 0; i < q; ++i) {
    for (int j = i + 1; j < q; ++j) {
      const double c = std::cos(angles[next]), s = std::sin(angles[next]);
      ++next;
      Matrix G = Matrix::Identity(q, q);
      G(i, i) = c;
      G(j, j) = c;
      G(i, j) = -s;
      G(j, i) = s;
      Q = Q * G;
    }
  }
  return Q;
}

Matrix lambda_materialize(const LambdaParam& param, double rho) {
  const int q = param.q;
  if (q < 1) throw Error(ErrorKind::input, "lambda block size must be positive");
  if (param.theta.size() != param.expected_size())
    throw Error(ErrorKind::input, "lambda parameter has " + std::to_string(param.theta.size()) +
                                      " entries, expected " +
                                      std::to_string(param.expected_size()));
  const double tol = 1e-12;
  auto check_modulus = [&](double mod) {
    if (mod < rho - tol || mod > 1.0 + tol) {
      std::ostringstream msg;
      msg << "eigenvalue modulus " << mod << " outside [" << rho << ", 1]";
      throw Error(ErrorKind::domain, msg.str());
    }
  };

  if (param.family == LambdaFamily::scalar) {
    check_modulus(std::abs(param.theta[0]));
    return param.theta[0] * Matrix::Identity(q, q);
  }

  int pairs = param.family == LambdaFamily::normal ? param.complex_pairs : 0;
  if (param.family == LambdaFamily::symmetric && param.complex_pairs != 0)
    throw Error(ErrorKind::input, "symmetric family has no complex eigenvalues");
  if (pairs < 0 || 2 * pairs > q) throw Error(ErrorKind::input, "too many complex pairs");

  Matrix D = Matrix::Zero(q, q);
  int idx = 0;
  for (int c = 0; c < pairs; ++c, idx += 2) {
    const double a = param.theta[idx], b = param.theta[idx + 1];
    check_modulus(std::hypot(a, b));
    D(idx, idx) = a;
    D(idx + 1, idx + 1) = a;
    D(idx, idx + 1) = b;
    D(idx + 1, idx) = -b;
  }
  for (; idx < q; ++idx) {
    check_modulus(std::abs(param.theta[idx]));
    D(idx, idx) = param.theta[idx];
  }
  const std::span<const double> angles(param.theta.data() + q, param.theta.size() - q);
  const Matrix Q = rotation_product(q, angles);
  return Q * D * Q.transpose();
}

double half_life_to_radius(double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::domain, "half-life must be positive");
  if (std::isinf(h)) return 1.0;
  return std::exp2(-1.0 / h);
}

double radius_to_half_life(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorKind::domain, "rho must lie in (0, 1]");
  if (rho == 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::ln2 / std::log(rho);
}

}  // namespace qcvar
