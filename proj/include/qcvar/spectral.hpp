#pragma once

#include "qcvar/linalg.hpp"

#include <span>
#include <string>
#include <vector>

namespace qcvar {

/// Lag matrices of a VAR(k) in p series, stored side by side as the p × kp
/// matrix (Φ₁, …, Φ_k).
class VarCoefficients {
 public:
  VarCoefficients(Matrix stacked, int k);

  static VarCoefficients from_blocks(std::span<const Matrix> blocks);

  int p() const noexcept { return static_cast<int>(stacked_.rows()); }
  int k() const noexcept { return k_; }
  int dim() const noexcept { return p() * k_; }

  const Matrix& stacked() const noexcept { return stacked_; }

  /// Φ_{lag}, lag in [1, k].
  Matrix lag(int lag) const;

  /// Φ(1) = I − Σ Φᵢ.
  Matrix at_unity() const;

 private:
  Matrix stacked_;
  int k_;
};

/// Characteristic roots, sorted by descending modulus, then descending real
/// part, then nonnegative imaginary part first.
struct RootSet {
  std::vector<Complex> roots;
};

void sort_roots(std::vector<Complex>& roots);

struct RegionSpec {
  explicit RegionSpec(double rho);
  double rho;

  bool in_lu(Complex z) const;
  bool in_st(Complex z) const;
};

enum class RootRegion { lu, st, neither };

struct Classification {
  int q = 0;
  std::vector<RootRegion> regions;
  std::vector<std::string> warnings;
};

struct SplitOptions {
  double separation_tol = 1e-8;
  double normalization_tol = 1e-10;
  double diagonalisability_warn = 1e6;
};

/// Invariant-subspace split of the companion matrix into the q largest roots
/// and the rest, normalized so that the last q rows of R_lu are the identity.
struct SpectralSplit {
  int p = 0;
  int k = 0;
  int q = 0;
  int r() const noexcept { return p - q; }

  Matrix A;          // r × q
  Matrix lambda_lu;  // q × q
  Matrix lambda_st;  // (kp−q) × (kp−q)
  Matrix R_lu;       // p × q, equals [A; I_q]
  Matrix R_st;       // p × (kp−q)
  Matrix L_lu;       // p × q
  Matrix L_st;       // p × (kp−q)
  Matrix big_R;      // kp × kp, col{R Λ^{k−i}}
  Matrix big_L;      // kp × kp, (big_R⁻¹)ᵀ

  RootSet roots;
  std::vector<std::string> warnings;

  Matrix lambda() const { return block_diag(lambda_lu, lambda_st); }
  Matrix R() const;
  Matrix L() const;
  Matrix big_R_lu() const { return big_R.leftCols(q); }
  Matrix big_R_st() const { return big_R.rightCols(big_R.cols() - q); }
  Matrix big_L_lu() const { return big_L.leftCols(q); }
  Matrix big_L_st() const { return big_L.rightCols(big_L.cols() - q); }
};

Matrix companion(const VarCoefficients& coeffs);

RootSet roots(const VarCoefficients& coeffs);

Classification classify(const RootSet& rootset, const RegionSpec& region);

SpectralSplit split(const VarCoefficients& coeffs, int q, const SplitOptions& options = {});

/// 𝐑 Λ 𝐋ᵀ.
Matrix reconstruct(const SpectralSplit& split);

/// Rescales a basis of an invariant subspace (F·basis = basis·lambda, basis kp × q)
/// so that its last q rows are the identity. Returns the rescaled basis and the
/// similarly transformed lambda.
std::pair<Matrix, Matrix> normalize_invariant_basis(const Matrix& basis, const Matrix& lambda,
                                                    double tol = 1e-10);

/// 𝐑_lu = col{[A; I] Λ^{k−i}}, i = 1..k.
Matrix stacked_lu_basis(const Matrix& A, const Matrix& lambda_lu, int k);

enum class LambdaFamily { scalar, symmetric, normal };

const char* to_string(LambdaFamily family) noexcept;
LambdaFamily parse_family(const std::string& name);

/// Point in the search space for Λ_lu.
///
/// scalar:    theta = {λ}, Λ = λ I_q.
/// symmetric: theta = q eigenvalues, then q(q−1)/2 rotation angles.
/// normal:    theta = q eigenvalue parameters, the first 2·complex_pairs of them
///            read as (re, im) pairs, then q(q−1)/2 rotation angles.
/// Rotations are applied in lexicographic plane order (1,2), (1,3), …, (q−1,q).
struct LambdaParam {
  LambdaFamily family = LambdaFamily::scalar;
  int q = 1;
  std::vector<double> theta;
  int complex_pairs = 0;

  std::size_t expected_size() const;
};

Matrix rotation_product(int q, std::span<const double> angles);

Matrix lambda_materialize(const LambdaParam& param, double rho);

double half_life_to_radius(double h);

/// −log 2 / log ρ; +inf for ρ = 1.
double radius_to_half_life(double rho);

}  // namespace qcvar
