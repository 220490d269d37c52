#pragma once

#include "qcvar/spectral.hpp"

#include <vector>

namespace qcvar {

struct ImpulseResponse {
  int horizon = 0;
  Matrix value;    // ∂y_{t+s}/∂ε_t
  Matrix lu_part;  // R_lu Λ_lu^{k−1+s} L_luᵀ
  Matrix st_part;  // R_st Λ_st^{k−1+s} L_stᵀ
};

/// Response at horizon s. At s = 0 the value is the identity, with the whole
/// response assigned to st_part and lu_part zero.
ImpulseResponse irf(const SpectralSplit& split, int s);

/// β with βᵀ = [I_r, −A]; p × r.
Matrix qcs_basis(const Matrix& A);
Matrix qcs_basis(const SpectralSplit& split);

/// ‖bᵀ IRF_s‖ for s = 1..s_max.
std::vector<double> decay_profile(const SpectralSplit& split, const Vector& b, int s_max);

struct StateDecomposition {
  Matrix z_lu;      // n × q, row t is z_lu,t
  Matrix z_st;      // n × (kp−q)
  Matrix phi_lu;    // R_lu Λ_luᵏ
  Matrix phi_st;    // R_st Λ_stᵏ
  Matrix residual;  // n × p, x_t − Φ_lu z_lu,t−1 − Φ_st z_st,t−1 − ε_t
  double max_residual = 0.0;
};

/// Splits a path x (n × p, pre-sample values zero) driven by eps into its
/// near-unity and stable state components.
StateDecomposition state_decompose(const SpectralSplit& split, const Matrix& x, const Matrix& eps);

/// (I_q ⊗ R_st)[(Λ_luᵀ ⊗ I) − (I ⊗ Λ_st)]⁻¹(I_q ⊗ L_stᵀ), pq × pq.
Matrix b_matrix(const SpectralSplit& split);

/// Applies the inverse kernel: returns X solving X Λ_lu − Λ_st X = Y.
Matrix solve_lu_st_kernel(const Matrix& lambda_lu, const Matrix& lambda_st, const Matrix& Y);

struct PerturbationJacobians {
  Matrix J_A;       // rq × pq
  Matrix J_lambda;  // q² × pq
  Matrix B;         // pq × pq
};

/// First-order response of (vec A, vec Λ_lu) to vec(ΔΦ 𝐑_lu).
PerturbationJacobians jacobians(const SpectralSplit& split);

/// α = Φ(1) β (βᵀβ)⁻¹.
Matrix adjustment_alpha(const VarCoefficients& coeffs, const Matrix& beta);

}  // namespace qcvar
