#include "qcvar/limitdist.hpp"

#include "qcvar/error.hpp"
#include "qcvar/parallel.hpp"
#include "qcvar/rng.hpp"
#include "qcvar/version.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace qcvar {

Matrix c_star(const Matrix& C, const Matrix& Delta) {
  if (C.rows() != C.cols() || Delta.rows() != C.rows() || Delta.cols() != C.rows())
    throw Error(ErrorKind::input, "C and Delta must be q x q");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Delta + Delta.transpose()));
  const Vector ev = es.eigenvalues();
  if (es.info() != Eigen::Success || ev.size() == 0 || ev.minCoeff() <= 0.0)
    throw Error(ErrorKind::input, "Delta must be positive definite");
  const Matrix V = es.eigenvectors();
  const Matrix half = V * ev.cwiseSqrt().asDiagonal() * V.transpose();
  const Matrix inv_half = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  return inv_half * C * half;
}

void LimitDistConfig::validate() const {
  if (q < 1) throw Error(ErrorKind::input, "q must be positive");
  if (C_star.rows() != q || C_star.cols() != q) throw Error(ErrorKind::input, "C must be q x q");
  if (!C_star.allFinite()) throw Error(ErrorKind::input, "C must be finite");
  if (steps < 100) throw Error(ErrorKind::input, "steps must be at least 100");
  if (reps < 1000) throw Error(ErrorKind::input, "reps must be at least 1000");
  if (levels.empty()) throw Error(ErrorKind::input, "at least one quantile level is required");
  for (double l : levels)
    if (!(l > 0.0 && l < 1.0)) throw Error(ErrorKind::input, "quantile levels must lie in (0, 1)");
}

Matrix detrend(const Matrix& path, DetCase det, const Vector& times) {
  if (times.size() != path.rows()) throw Error(ErrorKind::input, "times and path lengths differ");
  if (det == DetCase::none) return path;
  Matrix out = path.rowwise() - path.colwise().mean();
  if (det == DetCase::trend) {
    const Vector tc = times.array() - times.mean();
    const double stt = tc.squaredNorm();
    for (Eigen::Index c = 0; c < path.cols(); ++c) {
      const double b = tc.dot(out.col(c)) / stt;
      out.col(c) -= b * tc;
    }
  }
  return out;
}

namespace {

constexpr std::uint64_t kMaxRedraws = 100;

// Returns false when S₂ is numerically singular.
bool one_draw(const LimitDistConfig& cfg, std::uint64_t seed, const Vector& times, double& value) {
  const int q = cfg.q, steps = cfg.steps;
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal;
  const double sd = 1.0 / std::sqrt(static_cast<double>(steps));
  const Matrix step_matrix = Matrix::Identity(q, q) + cfg.C_star / static_cast<double>(steps);

  Matrix dW(steps, q);
  Matrix Zlag(steps, q);  // Z_{j−1}, j = 1..steps
  Vector z = Vector::Zero(q), w(q);
  for (int j = 0; j < steps; ++j) {
    for (int a = 0; a < q; ++a) w(a) = sd * normal(rng);
    Zlag.row(j) = z.transpose();
    dW.row(j) = w.transpose();
    z = step_matrix * z + w;
  }
  const Matrix Zbar = detrend(Zlag, cfg.det, times);
  const Matrix S1 = dW.transpose() * Zbar;
  const Matrix S2 = Zbar.transpose() * Zbar / static_cast<double>(steps);
  if (inverse_condition(S2) < 1e-12) return false;
  value = (S1 * S2.ldlt().solve(S1.transpose())).trace();
  return true;
}

Vector step_times(int steps) {
  Vector t(steps);
  for (int j = 0; j < steps; ++j) t(j) = static_cast<double>(j) / steps;
  return t;
}

}  // namespace

double simulate_statistic(const LimitDistConfig& config, std::uint64_t rep_index, int* redraws) {
  config.validate();
  const Vector times = step_times(config.steps);
  for (std::uint64_t attempt = 0; attempt < kMaxRedraws; ++attempt) {
    double value = 0.0;
    if (one_draw(config, derive_seed(config.seed, rep_index, attempt), times, value))
      return std::max(value, 0.0);
    if (redraws) ++*redraws;
  }
  throw Error(ErrorKind::numerical, "limit statistic: second-moment matrix singular on every redraw");
}

StatisticSample simulate_statistics(const LimitDistConfig& config) {
  config.validate();
  StatisticSample out;
  out.values.resize(config.reps);
  std::vector<int> redraws(config.reps, 0);
  parallel_for(static_cast<std::size_t>(config.reps), [&](std::size_t i) {
    out.values[i] = simulate_statistic(config, i, &redraws[i]);
  });
  for (int r : redraws) out.redraws += r;
  return out;
}

double sorted_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) throw Error(ErrorKind::input, "no data for quantile");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile_standard_error(const std::vector<double>& sorted, double level) {
  const double n = static_cast<double>(sorted.size());
  const double half = 1.959963984540054 * std::sqrt(n * level * (1.0 - level));
  const auto clamp = [&](double idx) {
    return static_cast<std::size_t>(std::clamp(idx, 0.0, n - 1.0));
  };
  const std::size_t lo = clamp(std::floor(n * level - half) - 1.0);
  const std::size_t hi = clamp(std::ceil(n * level + half) - 1.0);
  return (sorted[hi] - sorted[lo]) / (2.0 * 1.959963984540054);
}

std::size_t QuantileTable::level_index(double level) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (std::abs(levels[i] - level) <= 1e-12) return i;
  std::ostringstream msg;
  msg << "level " << level << " is not in the table (levels:";
  for (double l : levels) msg << ' ' << l;
  msg << ")";
  throw Error(ErrorKind::table_coverage, msg.str());
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool vec_less(const Matrix& a, const Matrix& b) {
  const Vector va = vec(a), vb = vec(b);
  return std::lexicographical_compare(va.data(), va.data() + va.size(), vb.data(),
                                      vb.data() + vb.size());
}

bool same_metadata(const QuantileTable& t, const LimitDistConfig& c) {
  return t.q == c.q && t.det == c.det && t.steps == c.steps && t.reps == c.reps &&
         t.seed == c.seed && t.levels == c.levels;
}

TableRow simulate_row(const Matrix& C, const LimitDistConfig& tmpl) {
  LimitDistConfig cfg = tmpl;
  cfg.C_star = C;
  StatisticSample s = simulate_statistics(cfg);
  std::sort(s.values.begin(), s.values.end());
  TableRow row;
  row.C = C;
  row.redraws = s.redraws;
  for (double l : cfg.levels) {
    row.quantiles.push_back(sorted_quantile(s.values, l));
    row.se.push_back(quantile_standard_error(s.values, l));
  }
  return row;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::io, "table: cannot parse " + what + " '" + s + "'");
  }
}

}  // namespace

std::string format_table(const QuantileTable& t) {
  std::ostringstream out;
  out << "format=qcvar-quantile-table-1\n";
  out << "version=" << t.version << "\n";
  out << "q=" << t.q << "\n";
  out << "det=" << to_string(t.det) << "\n";
  out << "steps=" << t.steps << "\n";
  out << "reps=" << t.reps << "\n";
  out << "seed=" << t.seed << "\n";
  out << "levels=";
  for (std::size_t i = 0; i < t.levels.size(); ++i) out << (i ? ";" : "") << fmt17(t.levels[i]);
  out << "\n";
  out << "rows=" << t.rows.size() << "\n\n";
  for (int j = 0; j < t.q; ++j)
    for (int i = 0; i < t.q; ++i) out << "c" << i + 1 << j + 1 << ",";
  for (double l : t.levels) out << "q" << fmt17(l) << ",";
  for (double l : t.levels) out << "se" << fmt17(l) << ",";
  out << "redraws\n";
  for (const auto& row : t.rows) {
    const Vector c = vec(row.C);
    for (Eigen::Index i = 0; i < c.size(); ++i) out << fmt17(c(i)) << ",";
    for (double v : row.quantiles) out << fmt17(v) << ",";
    for (double v : row.se) out << fmt17(v) << ",";
    out << row.redraws << "\n";
  }
  return out.str();
}

void write_table(const QuantileTable& table, const std::string& path) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io, "cannot write table file " + tmp);
    f << format_table(table);
    if (!f) throw Error(ErrorKind::io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot move table into place at " + path + ": " + ec.message());
}

QuantileTable parse_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> meta;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::io, "table: malformed header line '" + line + "'");
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorKind::io, "table: missing header key '" + key + "'");
    return it->second;
  };
  if (need("format") != "qcvar-quantile-table-1")
    throw Error(ErrorKind::io, "table: unsupported format '" + need("format") + "'");
  QuantileTable t;
  t.version = need("version");
  t.q = static_cast<int>(parse_double(need("q"), "q"));
  t.det = parse_det(need("det"));
  t.steps = static_cast<int>(parse_double(need("steps"), "steps"));
  t.reps = static_cast<int>(parse_double(need("reps"), "reps"));
  try {
    t.seed = std::stoull(need("seed"));
  } catch (const std::exception&) {
    throw Error(ErrorKind::io, "table: bad seed");
  }
  for (const auto& s : split_on(need("levels"), ';')) t.levels.push_back(parse_double(s, "level"));
  const std::size_t nrows = static_cast<std::size_t>(parse_double(need("rows"), "rows"));

  if (!std::getline(in, line)) throw Error(ErrorKind::io, "table: missing column header");
  const std::size_t L = t.levels.size(), qq = static_cast<std::size_t>(t.q * t.q);
  const std::size_t ncol = qq + 2 * L + 1;
  int lineno = static_cast<int>(meta.size()) + 3;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_on(line, ',');
    if (cells.size() != ncol)
      throw Error(ErrorKind::io, "table: line " + std::to_string(lineno) + " has " +
                                     std::to_string(cells.size()) + " fields, expected " +
                                     std::to_string(ncol));
    TableRow row;
    Vector c(qq);
    for (std::size_t i = 0; i < qq; ++i) c(i) = parse_double(cells[i], "C entry");
    row.C = unvec(c, t.q, t.q);
    for (std::size_t i = 0; i < L; ++i) row.quantiles.push_back(parse_double(cells[qq + i], "quantile"));
    for (std::size_t i = 0; i < L; ++i) row.se.push_back(parse_double(cells[qq + L + i], "se"));
    row.redraws = static_cast<int>(parse_double(cells.back(), "redraws"));
    t.rows.push_back(std::move(row));
  }
  if (t.rows.size() != nrows) throw Error(ErrorKind::io, "table: row count does not match header");
  return t;
}

QuantileTable read_table(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open table file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_table(ss.str());
}

QuantileTable build_table(const std::vector<Matrix>& grid, const LimitDistConfig& config,
                          const std::optional<std::string>& path) {
  if (grid.empty()) throw Error(ErrorKind::input, "C grid is empty");
  config.validate();
  for (const auto& C : grid)
    if (C.rows() != config.q || C.cols() != config.q)
      throw Error(ErrorKind::input, "every grid point must be q x q");

  QuantileTable t;
  if (path && std::filesystem::exists(*path)) {
    t = read_table(*path);
    if (!same_metadata(t, config))
      throw Error(ErrorKind::io, "existing table " + *path +
                                     " was built with different settings; remove it or choose "
                                     "another path");
  } else {
    t.q = config.q;
    t.det = config.det;
    t.steps = config.steps;
    t.reps = config.reps;
    t.seed = config.seed;
    t.levels = config.levels;
  }
  t.version = kVersion;
  for (const auto& C : grid) {
    const bool present = std::any_of(t.rows.begin(), t.rows.end(),
                                     [&](const TableRow& r) { return r.C == C; });
    if (present) continue;
    t.rows.push_back(simulate_row(C, config));
    std::sort(t.rows.begin(), t.rows.end(),
              [](const TableRow& a, const TableRow& b) { return vec_less(a.C, b.C); });
    if (path) write_table(t, *path);
  }
  if (path) write_table(t, *path);
  return t;
}

LookupResult lookup(const QuantileTable& table, const Matrix& C, double level) {
  if (table.rows.empty()) throw Error(ErrorKind::table_coverage, "quantile table is empty");
  if (C.rows() != table.q || C.cols() != table.q)
    throw Error(ErrorKind::input, "query C has the wrong dimension for this table");
  const std::size_t li = table.level_index(level);
  LookupResult out;
  constexpr double tol = 1e-9;

  if (table.q == 1) {
    const double c = C(0, 0);
    const double lo = table.rows.front().C(0, 0), hi = table.rows.back().C(0, 0);
    if (c < lo - tol || c > hi + tol) {
      std::ostringstream msg;
      msg << "C=" << c << " lies outside the table range [" << lo << ", " << hi << "]";
      throw Error(ErrorKind::table_coverage, msg.str());
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const double node = table.rows[i].C(0, 0);
      if (std::abs(node - c) <= tol) {
        out.value = table.rows[i].quantiles[li];
        out.exact = true;
        out.nodes = {table.rows[i].C};
        return out;
      }
      if (node > c) {
        const TableRow& a = table.rows[i - 1];
        const TableRow& b = table.rows[i];
        const double w = (c - a.C(0, 0)) / (node - a.C(0, 0));
        out.value = (1.0 - w) * a.quantiles[li] + w * b.quantiles[li];
        out.nodes = {a.C, b.C};
        out.distance = std::min(c - a.C(0, 0), node - c);
        return out;
      }
    }
    throw Error(ErrorKind::internal, "lookup fell off the end of the table");
  }

  // q ≥ 2: nearest node, with the distance reported; there is no hull test
  // because plug-in C values are generally not diagonal while grids often are.
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double d = (table.rows[i].C - C).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  out.value = table.rows[best].quantiles[li];
  out.nodes = {table.rows[best].C};
  out.distance = best_d;
  out.exact = best_d <= tol;
  if (!out.exact) {
    std::ostringstream msg;
    msg << "no table node at the query; using the nearest node at distance " << best_d;
    out.warning = msg.str();
  }
  return out;
}

std::vector<Matrix> scalar_c_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw Error(ErrorKind::input, "invalid C grid");
  std::vector<Matrix> out;
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(Matrix::Constant(1, 1, lo + static_cast<double>(i) * step));
  if (hi - out.back()(0, 0) > 1e-9) out.push_back(Matrix::Constant(1, 1, hi));
  return out;
}

}  // namespace qcvar
