#pragma once

#include "qcvar/linalg.hpp"

#include <functional>

namespace qcvar {

struct SimplexOptions {
  double ftol = 1e-8;       // spread of objective values across the simplex
  double xtol = 1e-7;       // largest vertex distance from the best vertex
  int max_evaluations = 20000;
  int max_restarts = 5;
  double initial_step = 0.1;
};

struct SimplexResult {
  Vector x;
  double value = 0.0;
  int evaluations = 0;
  int restarts = 0;
  bool converged = false;
};

/// Minimizes f by Nelder–Mead, restarting from the optimum with a fresh
/// simplex until a restart no longer improves the value.
SimplexResult minimize_simplex(const std::function<double(const Vector&)>& f, const Vector& x0,
                               const SimplexOptions& options = {});

}  // namespace qcvar
