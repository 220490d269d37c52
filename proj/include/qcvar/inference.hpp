#pragma once

#include "qcvar/likelihood.hpp"
#include "qcvar/limitdist.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcvar {

/// Upper quantile of χ² with `df` degrees of freedom.
double chi2_quantile(double level, double df = 1.0);

enum class LrKind { lambda, coefficient };

struct LrStatistic {
  LrKind kind = LrKind::lambda;
  double value = 0.0;
  bool clamped = false;  // a small negative value was set to zero
  Matrix lambda0;
  std::optional<FixedEntry> entry;
  FitResult unrestricted;
  FitResult restricted;
  std::vector<std::string> notes;
};

/// Negative values within `slack` become zero; beyond it they signal an
/// optimizer inconsistency and throw.
double clamp_lr(double value, bool& clamped, double slack = 1e-8);

/// 2[max over the Λ space of the profile loglik − profile loglik at Λ₀].
LrStatistic lr_lambda(const RegressionProblem& problem, const Matrix& lambda0,
                      const LambdaGrid& space);

/// Same statistic reusing an existing profile over the Λ space.
LrStatistic lr_lambda(const RegressionProblem& problem, const Matrix& lambda0,
                      const ProfileLambdaResult& profile);

/// 2[profile_A(Λ₀) − profile_A(Λ₀, a_ij = a0)]; i, j zero-based.
LrStatistic lr_coefficient(const RegressionProblem& problem, double a0, int i, int j,
                           const Matrix& lambda0);

/// Variant reusing the unrestricted profile fit at Λ₀.
LrStatistic lr_coefficient(const RegressionProblem& problem, double a0, int i, int j,
                           const Matrix& lambda0, const FitResult& unrestricted);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_unbounded = false;
  bool hi_unbounded = false;

  bool contains(double x) const {
    return (lo_unbounded || x >= lo) && (hi_unbounded || x <= hi);
  }
};

/// Sorts and merges overlapping intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals);
Interval hull(const std::vector<Interval>& intervals);

struct LambdaNode {
  LambdaParam param;
  Matrix lambda;
  bool ok = false;
  double lr = 0.0;
  Matrix c;        // n(Λ₀ − I)
  Matrix c_star;   // after the Δ plug-in
  double critical = 0.0;
  bool accepted = false;
  std::string note;
};

struct LambdaConfidenceSet {
  double level = 0.0;
  std::vector<LambdaNode> nodes;      // every evaluated grid point
  std::vector<Interval> intervals;    // contiguous accepted runs (q = 1)
  ProfileLambdaResult profile;
  int failed = 0;
  std::vector<std::string> warnings;

  std::vector<const LambdaNode*> accepted() const;
};

struct LambdaCiOptions {
  // n in n(Λ₀ − I); zero means the number of rows of the data.
  int sample_size = 0;
};

LambdaConfidenceSet ci_lambda(const RegressionProblem& problem, double alpha1,
                              const LambdaGrid& space, const QuantileTable& table,
                              const LambdaCiOptions& options = {});

struct CoefficientCiOptions {
  int scan_points = 21;
  double tolerance = 1e-6;
  int max_expansions = 60;
};

struct CoefficientConfidenceSet {
  double level = 0.0;
  double center = 0.0;  // Â_ij given Λ₀
  double se = 0.0;      // from the profile curvature
  std::vector<Interval> intervals;
  Interval hull;
  bool unbounded = false;
  std::vector<std::string> diagnostics;
};

CoefficientConfidenceSet ci_coefficient_given_lambda(const RegressionProblem& problem,
                                                     double alpha2, int i, int j,
                                                     const Matrix& lambda0,
                                                     const CoefficientCiOptions& options = {});

struct ConditionalInterval {
  Matrix lambda0;
  CoefficientConfidenceSet set;
};

struct BonferroniSet {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  LambdaConfidenceSet lambda_set;
  std::vector<ConditionalInterval> conditional;
  std::vector<Interval> intervals;  // disjoint union
  Interval hull;
  bool fallback = false;  // 𝒞_Λ was empty; the argmax was used instead
  std::vector<std::string> warnings;
};

BonferroniSet bonferroni_ci(const RegressionProblem& problem, double alpha1, double alpha2, int i,
                            int j, const LambdaGrid& space, const QuantileTable& table,
                            const LambdaCiOptions& lambda_options = {},
                            const CoefficientCiOptions& coef_options = {});

}  // namespace qcvar
