#include "qcvar/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace qcvar {

namespace {

struct Run {
  Vector x;
  double value;
  bool converged;
};

Run nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                const SimplexOptions& opt, int& evaluations) {
  const auto n = x0.size();
  auto eval = [&](const Vector& x) {
    ++evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (Eigen::Index i = 0; i < n; ++i)
    pts[i + 1](i) += opt.initial_step * std::max(1.0, std::abs(x0(i)));
  for (Eigen::Index i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<Eigen::Index> order(n + 1);
  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const auto best = order.front(), worst = order.back(), second = order[n - 1];

    double xspread = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i)
      xspread = std::max(xspread, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    const double fspread = vals[worst] - vals[best];
    if (fspread <= opt.ftol && xspread <= opt.xtol) return {pts[best], vals[best], true};
    if (evaluations >= opt.max_evaluations) return {pts[best], vals[best], false};

    Vector centroid = Vector::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Vector xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                              : Vector(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const Vector&)>& f, const Vector& x0,
                               const SimplexOptions& options) {
  SimplexResult out;
  if (x0.size() == 0) {
    out.x = x0;
    out.value = f(x0);
    out.evaluations = 1;
    out.converged = true;
    return out;
  }
  Run run = nelder_mead(f, x0, options, out.evaluations);
  while (out.restarts < options.max_restarts && out.evaluations < options.max_evaluations) {
    Run again = nelder_mead(f, run.x, options, out.evaluations);
    ++out.restarts;
    const bool improved = again.value < run.value - options.ftol;
    if (again.value <= run.value) run = again;
    if (!improved) {
      run.converged = run.converged || again.converged;
      break;
    }
  }
  out.x = run.x;
  out.value = run.value;
  out.converged = run.converged;
  return out;
}

}  // namespace qcvar
