#pragma once

#include "qcvar/likelihood.hpp"
#include "qcvar/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcvar {

/// Δ^{−1/2} C Δ^{1/2} with principal symmetric roots.
Matrix c_star(const Matrix& C, const Matrix& Delta);

struct LimitDistConfig {
  int q = 1;
  Matrix C_star = Matrix::Zero(1, 1);
  DetCase det = DetCase::trend;
  int steps = 2000;
  int reps = 100000;
  std::uint64_t seed = 1;
  std::vector<double> levels{0.90, 0.95, 0.975, 0.99};

  void validate() const;
};

/// Residual of the rows of `path` after least squares on the deterministic
/// terms (1, t) / (1) / nothing, with t taken from `times`.
Matrix detrend(const Matrix& path, DetCase det, const Vector& times);

/// One draw of tr(S₁ S₂⁻¹ S₁ᵀ) from the discretized Ornstein–Uhlenbeck
/// functional. The innovations depend only on (config.seed, rep_index), so
/// statistics for different C share random numbers. Draws with a numerically
/// singular S₂ are redrawn; the number of redraws is added to *redraws.
double simulate_statistic(const LimitDistConfig& config, std::uint64_t rep_index,
                          int* redraws = nullptr);

struct StatisticSample {
  std::vector<double> values;  // in replication order
  int redraws = 0;
};

StatisticSample simulate_statistics(const LimitDistConfig& config);

/// Type-7 sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double level);

/// Monte Carlo standard error of the level quantile from the order-statistic
/// confidence band.
double quantile_standard_error(const std::vector<double>& sorted, double level);

struct TableRow {
  Matrix C;
  std::vector<double> quantiles;
  std::vector<double> se;
  int redraws = 0;
};

struct QuantileTable {
  int q = 1;
  DetCase det = DetCase::trend;
  int steps = 2000;
  int reps = 100000;
  std::uint64_t seed = 1;
  std::vector<double> levels;
  std::string version;
  std::vector<TableRow> rows;  // sorted by vec(C)

  std::size_t level_index(double level) const;
};

/// Simulates every grid point (skipping points already present in `path`
/// when it holds a table with the same metadata) and, when `path` is given,
/// rewrites the file after each point so that interrupted builds resume.
QuantileTable build_table(const std::vector<Matrix>& grid, const LimitDistConfig& config,
                          const std::optional<std::string>& path = std::nullopt);

void write_table(const QuantileTable& table, const std::string& path);
std::string format_table(const QuantileTable& table);
QuantileTable read_table(const std::string& path);
QuantileTable parse_table(const std::string& text);

struct LookupResult {
  double value = 0.0;
  bool exact = false;
  std::vector<Matrix> nodes;  // bracketing nodes (q = 1) or the nearest node
  double distance = 0.0;      // Frobenius distance to the nearest node
  std::string warning;
};

LookupResult lookup(const QuantileTable& table, const Matrix& C, double level);

/// Scalar grid c = lo, lo + step, …, hi as 1×1 matrices.
std::vector<Matrix> scalar_c_grid(double lo, double hi, double step);

}  // namespace qcvar
