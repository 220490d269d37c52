#pragma once

#include "qcvar/rng.hpp"
#include "qcvar/spectral.hpp"

#include <cstdint>
#include <functional>

namespace qcvar {

/// Φ whose standard pair is R = [[A; I_q], R_st], Λ = diag(Λ_lu, Λ_st):
/// Φ = R Λᵏ 𝐑⁻¹ with 𝐑 = col{R Λ^{k−i}}. R_st is p × (kp−q).
VarCoefficients build_var_from_parts(const Matrix& A, const Matrix& lambda_lu, const Matrix& R_st,
                                     const Matrix& lambda_st, int k);

struct BuildOptions {
  double root_gap = 1e-3;
  int max_attempts = 200;
  // Redraw when the stacked basis, columns scaled to unit norm, is worse
  // conditioned than this; near-parallel R_lu and R_st give huge Φ.
  double max_basis_condition = 1e3;
};

/// Coefficients with the prescribed (A, Λ_lu) block and a random stable
/// remainder drawn from `stationary_seed`. For k = 1 the remainder is a random
/// (R_st, Λ_st) pair; for k ≥ 2 a random stable base is projected onto
/// {Φ : Φ 𝐑_lu = [A; I] Λ_luᵏ} at least Frobenius distance.
VarCoefficients build_var(const Matrix& A, const Matrix& lambda_lu, std::uint64_t stationary_seed,
                          int k, const BuildOptions& options = {});

/// Least-norm correction of `base` onto {Φ : Φ 𝐑_lu = [A; I] Λ_luᵏ}.
Matrix project_onto_lu_constraint(const Matrix& base, const Matrix& A, const Matrix& lambda_lu,
                                  int k);

struct StationaryPart {
  Matrix A;          // r × q
  Matrix R_st;       // p × (kp−q)
  Matrix lambda_st;  // (kp−q) × (kp−q)
  int k = 1;
};

struct LocalSequence {
  Matrix C;
  int n = 0;
  Matrix lambda_lu;  // I + C/n
  VarCoefficients realized;
};

/// Φ_n with Λ_lu(Φ_n) = I + C/n and the stationary pair held fixed in n.
LocalSequence local_sequence(const Matrix& C, int n, const StationaryPart& base);

struct DgpSpec {
  VarCoefficients coeffs;
  Matrix sigma;
  Vector mu;
  Vector delta;
  int n = 0;
};

struct SimulateOptions {
  bool zero_noise = false;
  // Optional replacement for the Gaussian draw; must return a p-vector.
  std::function<Vector(Engine&)> innovation_sampler;
};

struct SimulatedPath {
  Matrix y;    // n × p
  Matrix x;    // n × p, y minus deterministic terms
  Matrix eps;  // n × p
};

SimulatedPath simulate(const DgpSpec& spec, std::uint64_t seed, const SimulateOptions& options = {});

}  // namespace qcvar
