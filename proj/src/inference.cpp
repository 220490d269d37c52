#include "qcvar/inference.hpp"

#include "qcvar/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qcvar {

double chi2_quantile(double level, double df) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::input, "level must lie in (0, 1)");
  if (!(df > 0.0)) throw Error(ErrorKind::input, "degrees of freedom must be positive");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), level);
}

double clamp_lr(double value, bool& clamped, double slack) {
  clamped = false;
  if (std::isnan(value)) throw Error(ErrorKind::numerical, "likelihood ratio is undefined");
  if (value >= 0.0) return value;
  if (value >= -slack) {
    clamped = true;
    return 0.0;
  }
  std::ostringstream msg;
  msg << "likelihood ratio " << value << " is negative beyond tolerance; the restricted "
      << "maximum exceeds the unrestricted one";
  throw Error(ErrorKind::internal, msg.str());
}

namespace {

void check_in_space(const Matrix& lambda0, double rho) {
  Eigen::EigenSolver<Matrix> es(lambda0, false);
  const RegionSpec region(rho);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (!region.in_lu(es.eigenvalues()(i)))
      throw Error(ErrorKind::domain, "Lambda0 has an eigenvalue outside the near-unity region");
}

}  // namespace

LrStatistic lr_lambda(const RegressionProblem& problem, const Matrix& lambda0,
                      const ProfileLambdaResult& profile) {
  LrStatistic out;
  out.kind = LrKind::lambda;
  out.lambda0 = lambda0;
  out.restricted = profile_A(problem, lambda0);
  out.unrestricted = profile.best;
  if (out.restricted.loglik > out.unrestricted.loglik) {
    out.notes.push_back("the null value fits better than every point of the search; using it as the maximum");
    out.unrestricted = out.restricted;
  }
  out.value = clamp_lr(2.0 * (out.unrestricted.loglik - out.restricted.loglik), out.clamped);
  return out;
}

LrStatistic lr_lambda(const RegressionProblem& problem, const Matrix& lambda0,
                      const LambdaGrid& space) {
  if (lambda0.rows() != space.q || lambda0.cols() != space.q)
    throw Error(ErrorKind::input, "Lambda0 does not match the q of the search space");
  check_in_space(lambda0, space.rho);
  return lr_lambda(problem, lambda0, profile_lambda(problem, space));
}

LrStatistic lr_coefficient(const RegressionProblem& problem, double a0, int i, int j,
                           const Matrix& lambda0, const FitResult& unrestricted) {
  LrStatistic out;
  out.kind = LrKind::coefficient;
  out.lambda0 = lambda0;
  out.entry = FixedEntry{i, j, a0};
  out.unrestricted = unrestricted;
  ProfileOptions fixed;
  fixed.init = unrestricted.A;
  fixed.fixed = out.entry;
  out.restricted = profile_A(problem, lambda0, fixed);
  if (out.restricted.loglik > out.unrestricted.loglik) {
    // The free search stopped short; restart it from the constrained optimum.
    ProfileOptions again;
    again.init = out.restricted.A;
    FitResult better = profile_A(problem, lambda0, again);
    if (better.loglik > out.unrestricted.loglik) out.unrestricted = std::move(better);
    out.notes.push_back("unrestricted profile re-optimized from the constrained solution");
    if (out.restricted.loglik > out.unrestricted.loglik) out.unrestricted = out.restricted;
  }
  out.value = clamp_lr(2.0 * (out.unrestricted.loglik - out.restricted.loglik), out.clamped);
  return out;
}

LrStatistic lr_coefficient(const RegressionProblem& problem, double a0, int i, int j,
                           const Matrix& lambda0) {
  return lr_coefficient(problem, a0, i, j, lambda0, profile_A(problem, lambda0));
}

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    if (a.lo_unbounded != b.lo_unbounded) return a.lo_unbounded;
    return a.lo < b.lo;
  });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty()) {
      Interval& last = out.back();
      if (last.hi_unbounded || iv.lo_unbounded || iv.lo <= last.hi) {
        if (iv.hi_unbounded) last.hi_unbounded = true;
        else if (!last.hi_unbounded) last.hi = std::max(last.hi, iv.hi);
        continue;
      }
    }
    out.push_back(iv);
  }
  return out;
}

Interval hull(const std::vector<Interval>& v) {
  if (v.empty()) throw Error(ErrorKind::input, "hull of an empty set");
  Interval h = v.front();
  for (const auto& iv : v) {
    h.lo_unbounded = h.lo_unbounded || iv.lo_unbounded;
    h.hi_unbounded = h.hi_unbounded || iv.hi_unbounded;
    h.lo = std::min(h.lo, iv.lo);
    h.hi = std::max(h.hi, iv.hi);
  }
  return h;
}

std::vector<const LambdaNode*> LambdaConfidenceSet::accepted() const {
  std::vector<const LambdaNode*> out;
  for (const auto& n : nodes)
    if (n.accepted) out.push_back(&n);
  return out;
}

LambdaConfidenceSet ci_lambda(const RegressionProblem& problem, double alpha1,
                              const LambdaGrid& space, const QuantileTable& table,
                              const LambdaCiOptions& options) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw Error(ErrorKind::input, "alpha1 must lie in (0, 1)");
  if (table.q != space.q) throw Error(ErrorKind::input, "quantile table has a different q");
  if (table.det != problem.det)
    throw Error(ErrorKind::input, std::string("quantile table was built for det=") +
                                      to_string(table.det) + " but the fit uses det=" +
                                      to_string(problem.det));
  const double level = 1.0 - alpha1;
  table.level_index(level);
  const int n = options.sample_size > 0 ? options.sample_size : static_cast<int>(problem.data.rows());
  const int q = space.q;

  LambdaConfidenceSet out;
  out.level = level;
  out.profile = profile_lambda(problem, space);
  const double max_ll = out.profile.best.loglik;
  std::vector<std::string> missing;
  for (const auto& ev : out.profile.trace) {
    LambdaNode node;
    node.param = ev.param;
    node.lambda = ev.lambda;
    node.ok = ev.ok;
    if (!ev.ok) {
      node.note = ev.error;
      ++out.failed;
      out.nodes.push_back(std::move(node));
      continue;
    }
    bool clamped = false;
    node.lr = clamp_lr(2.0 * (max_ll - ev.loglik), clamped);
    node.c = n * (ev.lambda - Matrix::Identity(q, q));
    node.c_star = node.c;
    if (q > 1) {
      const FitResult fit = restricted_fit(problem, ev.A, ev.lambda);
      if (fit.split) {
        const Matrix Delta = fit.split->L_lu.transpose() * problem.sigma_hat * fit.split->L_lu;
        try {
          node.c_star = c_star(node.c, Delta);
        } catch (const Error& e) {
          node.note = std::string("Delta plug-in unavailable: ") + e.what();
        }
      } else {
        node.note = "Delta plug-in unavailable: restricted estimate does not split";
      }
    }
    try {
      const LookupResult lr = lookup(table, node.c_star, level);
      node.critical = lr.value;
      if (!lr.warning.empty()) node.note += (node.note.empty() ? "" : "; ") + lr.warning;
      node.accepted = node.lr <= node.critical;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::table_coverage) throw;
      std::ostringstream c;
      c << "[";
      for (Eigen::Index a = 0; a < q; ++a)
        for (Eigen::Index b = 0; b < q; ++b) c << (a || b ? " " : "") << node.c_star(a, b);
      c << "]";
      missing.push_back(c.str());
    }
    out.nodes.push_back(std::move(node));
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "quantile table does not cover " << missing.size() << " grid value(s) of C:";
    // Long lists are cut to their ends, which show how far the table must reach.
    const std::size_t shown = 8;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (missing.size() > shown && i == shown / 2) {
        msg << " ... (" << missing.size() - shown << " more) ...";
        i = missing.size() - shown / 2;
      }
      msg << ' ' << missing[i];
    }
    throw Error(ErrorKind::table_coverage, msg.str());
  }
  if (out.failed > 0)
    out.warnings.push_back(std::to_string(out.failed) + " grid point(s) could not be fitted");

  if (q == 1) {
    std::optional<Interval> run;
    for (const auto& node : out.nodes) {
      if (!node.ok) continue;
      const double v = node.lambda(0, 0);
      if (node.accepted) {
        if (!run) run = Interval{v, v};
        else run->hi = v;
      } else if (run) {
        out.intervals.push_back(*run);
        run.reset();
      }
    }
    if (run) out.intervals.push_back(*run);
  }
  return out;
}

CoefficientConfidenceSet ci_coefficient_given_lambda(const RegressionProblem& problem,
                                                     double alpha2, int i, int j,
                                                     const Matrix& lambda0,
                                                     const CoefficientCiOptions& options) {
  if (!(alpha2 > 0.0 && alpha2 < 1.0)) throw Error(ErrorKind::input, "alpha2 must lie in (0, 1)");
  const int q = static_cast<int>(lambda0.rows()), r = problem.p - q;
  if (r * q == 0) throw Error(ErrorKind::input, "A is empty; there is no coefficient to bound");
  if (i < 0 || i >= r || j < 0 || j >= q)
    throw Error(ErrorKind::input, "coefficient index outside the r x q matrix A");

  CoefficientConfidenceSet out;
  out.level = 1.0 - alpha2;
  const double crit = chi2_quantile(out.level);
  const FitResult fit = profile_A(problem, lambda0);
  const double center = fit.A(i, j);
  out.center = center;
  auto lr = [&](double a) { return lr_coefficient(problem, a, i, j, lambda0, fit).value; };
  auto g = [&](double a) { return lr(a) - crit; };

  const double h = 1e-2 * (1.0 + std::abs(center));
  const double curv = 0.5 * (lr(center + h) + lr(center - h));
  out.se = curv > 1e-12 ? h / std::sqrt(curv) : 1.0;
  if (curv <= 1e-12) out.diagnostics.push_back("profile is flat near the estimate; unit scale used");

  auto find_edge = [&](double dir, bool& unbounded) {
    double inner = center, width = 2.0 * out.se, outer = center + dir * width;
    int expansions = 0;
    while (g(outer) < 0.0) {
      if (++expansions > options.max_expansions) {
        unbounded = true;
        return outer;
      }
      inner = outer;
      width *= 2.0;
      outer = center + dir * width;
    }
    while (std::abs(outer - inner) > options.tolerance) {
      const double mid = 0.5 * (inner + outer);
      if (g(mid) < 0.0) inner = mid;
      else outer = mid;
    }
    return 0.5 * (inner + outer);
  };
  bool lo_unb = false, hi_unb = false;
  const double lo = find_edge(-1.0, lo_unb);
  const double hi = find_edge(+1.0, hi_unb);
  out.unbounded = lo_unb || hi_unb;
  if (lo_unb) out.diagnostics.push_back("no lower bracket found; interval unbounded below");
  if (hi_unb) out.diagnostics.push_back("no upper bracket found; interval unbounded above");

  // Scan for interior rejections that a two-sided bisection would miss.
  const int m = std::max(options.scan_points, 3);
  std::vector<double> xs(m), gs(m);
  for (int s = 0; s < m; ++s) {
    xs[s] = lo + (hi - lo) * s / (m - 1);
    gs[s] = (s == 0 || s == m - 1) ? -0.0 : g(xs[s]);
  }
  int nonmonotone = 0;
  for (int s = 1; s < m; ++s) {
    const bool right = xs[s - 1] >= center;
    const bool left = xs[s] <= center;
    if (right && gs[s] + 1e-9 < gs[s - 1] && s != m - 1) ++nonmonotone;
    if (left && gs[s - 1] + 1e-9 < gs[s] && s - 1 != 0) ++nonmonotone;
  }
  if (nonmonotone > 0)
    out.diagnostics.push_back("profile LR is not monotone away from the estimate at " +
                              std::to_string(nonmonotone) + " scan point(s)");

  auto boundary = [&](double in, double outp) {
    while (std::abs(outp - in) > options.tolerance) {
      const double mid = 0.5 * (in + outp);
      if (g(mid) <= 0.0) in = mid;
      else outp = mid;
    }
    return 0.5 * (in + outp);
  };
  std::optional<Interval> run;
  for (int s = 0; s < m; ++s) {
    const bool acc = gs[s] <= 0.0;
    if (acc && !run) {
      run = Interval{s == 0 ? lo : boundary(xs[s], xs[s - 1]), 0.0};
      run->lo_unbounded = s == 0 && lo_unb;
    } else if (!acc && run) {
      run->hi = boundary(xs[s - 1], xs[s]);
      out.intervals.push_back(*run);
      run.reset();
    }
  }
  if (run) {
    run->hi = hi;
    run->hi_unbounded = hi_unb;
    out.intervals.push_back(*run);
  }
  if (out.intervals.size() > 1)
    out.diagnostics.push_back("acceptance region is a union of " +
                              std::to_string(out.intervals.size()) + " intervals");
  out.hull = hull(out.intervals);
  return out;
}

BonferroniSet bonferroni_ci(const RegressionProblem& problem, double alpha1, double alpha2, int i,
                            int j, const LambdaGrid& space, const QuantileTable& table,
                            const LambdaCiOptions& lambda_options,
                            const CoefficientCiOptions& coef_options) {
  if (!(alpha1 + alpha2 < 1.0)) throw Error(ErrorKind::input, "alpha1 + alpha2 must be below 1");
  BonferroniSet out;
  out.alpha1 = alpha1;
  out.alpha2 = alpha2;
  out.lambda_set = ci_lambda(problem, alpha1, space, table, lambda_options);
  std::vector<Matrix> lambdas;
  for (const LambdaNode* node : out.lambda_set.accepted()) lambdas.push_back(node->lambda);
  if (lambdas.empty()) {
    out.fallback = true;
    out.warnings.push_back(
        "WARNING: the confidence set for Lambda is empty on this grid; reporting the conditional "
        "interval at the maximizing Lambda instead");
    lambdas.push_back(out.lambda_set.profile.best_lambda);
  }
  std::vector<Interval> all;
  for (const auto& lam : lambdas) {
    ConditionalInterval ci{lam, ci_coefficient_given_lambda(problem, alpha2, i, j, lam, coef_options)};
    all.insert(all.end(), ci.set.intervals.begin(), ci.set.intervals.end());
    out.conditional.push_back(std::move(ci));
  }
  out.intervals = merge_intervals(all);
  out.hull = hull(out.intervals);
  return out;
}

}  // namespace qcvar
