// Command-line driver over the qcvar C interface.

#include "qcvar/qcvar.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

struct Failure {
  int code;
  std::string message;
};

void check(int status) {
  if (status != QCV_OK) throw Failure{status, qcv_last_error()};
}

[[noreturn]] void input_error(const std::string& message) { throw Failure{QCV_ERR_INPUT, message}; }

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using VarPtr = std::unique_ptr<qcv_var, Deleter<qcv_var, qcv_var_destroy>>;
using SplitPtr = std::unique_ptr<qcv_split, Deleter<qcv_split, qcv_split_destroy>>;
using DataPtr = std::unique_ptr<qcv_dataset, Deleter<qcv_dataset, qcv_dataset_destroy>>;
using FitPtr = std::unique_ptr<qcv_fit, Deleter<qcv_fit, qcv_fit_destroy>>;
using TablePtr = std::unique_ptr<qcv_table, Deleter<qcv_table, qcv_table_destroy>>;
using CiPtr = std::unique_ptr<qcv_ci, Deleter<qcv_ci, qcv_ci_destroy>>;

// Column-major dense matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r * c), fill) {}
  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  double& operator()(int i, int j) { return v[static_cast<std::size_t>(j * rows + i)]; }
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(j * rows + i)]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
};

Mat multiply(const Mat& a, const Mat& b, bool transpose_a = false) {
  const int n = transpose_a ? a.cols : a.rows, inner = transpose_a ? a.rows : a.cols;
  Mat out(n, b.cols);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int l = 0; l < inner; ++l) s += (transpose_a ? a(l, i) : a(i, l)) * b(l, j);
      out(i, j) = s;
    }
  return out;
}

// ---- report model

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  std::vector<std::pair<std::string, std::string>> meta;
  std::deque<Table> tables;  // add() hands out references that must stay valid
  std::vector<std::string> notes;

  Table& add(std::string name, std::vector<std::string> columns) {
    tables.push_back(Table{std::move(name), std::move(columns), {}});
    return tables.back();
  }
};

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return number(*d);
    // Round through the printed form so JSON and CSV carry the same digits.
    return std::stod(number(*d));
  }
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render_text(const Report& r) {
  std::ostringstream out;
  for (const auto& [k, v] : r.meta) out << "# " << k << ": " << v << '\n';
  for (const auto& t : r.tables) {
    out << "\n== " << t.name << " ==\n";
    std::vector<std::size_t> width(t.columns.size());
    for (std::size_t j = 0; j < t.columns.size(); ++j) width[j] = t.columns[j].size();
    std::vector<std::vector<std::string>> text;
    for (const auto& row : t.rows) {
      std::vector<std::string> line;
      for (std::size_t j = 0; j < row.size(); ++j) {
        line.push_back(cell_text(row[j]));
        width[j] = std::max(width[j], line.back().size());
      }
      text.push_back(std::move(line));
    }
    auto emit = [&](const std::vector<std::string>& line) {
      for (std::size_t j = 0; j < line.size(); ++j) {
        if (j) out << "  ";
        out << line[j];
        if (j + 1 < line.size()) out << std::string(width[j] - line[j].size(), ' ');
      }
      out << '\n';
    };
    emit(t.columns);
    for (const auto& line : text) emit(line);
  }
  if (!r.notes.empty()) {
    out << '\n';
    for (const auto& n : r.notes) out << "note: " << n << '\n';
  }
  return out.str();
}

std::string render_csv(const Report& r) {
  std::ostringstream out;
  for (const auto& [k, v] : r.meta) out << "# " << k << '=' << v << '\n';
  for (const auto& n : r.notes) out << "# note: " << n << '\n';
  for (const auto& t : r.tables) {
    out << "# table: " << t.name << '\n';
    for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << csv_field(t.columns[j]);
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << csv_field(cell_text(row[j]));
      out << '\n';
    }
  }
  return out.str();
}

std::string render_json(const Report& r) {
  json doc;
  json meta = json::object();
  for (const auto& [k, v] : r.meta) meta[k] = v;
  doc["meta"] = meta;
  json tables = json::object();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json line = json::array();
      for (const auto& c : row) line.push_back(cell_json(c));
      rows.push_back(line);
    }
    tables[t.name] = json{{"columns", t.columns}, {"rows", rows}};
  }
  doc["tables"] = tables;
  doc["notes"] = r.notes;
  return doc.dump(2) + "\n";
}

// ---- configuration

struct RunConfig {
  std::string command;
  std::string data;
  std::string coeffs;
  int k = 1;
  std::optional<int> q;
  std::optional<double> rho;
  std::optional<double> half_life;
  std::string det = "trend";
  std::string family = "scalar";
  double grid_step = 0.0;
  double angle_step = 0.0;
  bool no_refine = false;
  double alpha1 = 0.025;
  double alpha2 = 0.025;
  std::string coef;
  std::string table;
  std::uint64_t seed = 1;
  std::string format = "text";
  std::string output;

  // command specific
  int horizon = 20;
  std::string lambda0;
  std::optional<double> a0;
  bool build_table = false;
  int steps = 2000;
  int reps = 100000;
  std::string levels = "0.9,0.95,0.975,0.99";
  std::string c_grid;
  std::string c_nodes;
  double c_step = 1.0;
  int n = 0;
  std::string sigma;
  std::string mu;
  std::string delta;
  bool zero_noise = false;
  bool with_eps = false;
};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int det_code(const std::string& det) {
  if (det == "none") return QCV_DET_NONE;
  if (det == "const") return QCV_DET_CONST;
  if (det == "trend") return QCV_DET_TREND;
  input_error("unknown deterministic case '" + det + "' (expected trend, const or none)");
}

int family_code(const std::string& family) {
  if (family == "scalar") return QCV_FAMILY_SCALAR;
  if (family == "symmetric") return QCV_FAMILY_SYMMETRIC;
  if (family == "normal") return QCV_FAMILY_NORMAL;
  input_error("unknown Lambda family '" + family + "' (expected scalar, symmetric or normal)");
}

double resolved_rho(const RunConfig& c) {
  if (c.rho && c.half_life) input_error("give either --rho or --half-life, not both");
  if (!c.rho && !c.half_life) input_error("--rho or --half-life is required");
  if (c.rho) return *c.rho;
  double rho = 0.0;
  check(qcv_half_life_to_radius(*c.half_life, &rho));
  return rho;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json parse_json_arg(const std::string& arg, const char* what) {
  const std::string text = !arg.empty() && arg[0] == '@' ? read_file(arg.substr(1)) : arg;
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    input_error(std::string("cannot parse ") + what + " as JSON: " + e.what());
  }
}

// A number, a flat array (column vector) or an array of rows.
Mat json_matrix(const json& j, const char* what) {
  if (j.is_number()) {
    Mat m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array() || j.empty()) input_error(std::string(what) + " must be a number or an array");
  if (!j[0].is_array()) {
    Mat m(static_cast<int>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) input_error(std::string(what) + " has a non-numeric entry");
      m(static_cast<int>(i), 0) = j[i].get<double>();
    }
    return m;
  }
  const int rows = static_cast<int>(j.size()), cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      input_error(std::string(what) + " has ragged rows");
    for (int c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        input_error(std::string(what) + " has a non-numeric entry");
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

// {"phi": [Phi_1, ..., Phi_k]}, [Phi_1, ..., Phi_k] or a single matrix.
VarPtr parse_coefficients(const std::string& arg) {
  json j = parse_json_arg(arg, "coefficients");
  if (j.is_object()) {
    if (!j.contains("phi")) input_error("coefficient object needs a \"phi\" entry");
    j = j["phi"];
  }
  std::vector<Mat> blocks;
  if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
    for (const auto& b : j) blocks.push_back(json_matrix(b, "coefficient block"));
  } else {
    blocks.push_back(json_matrix(j, "coefficient matrix"));
  }
  const int p = blocks[0].rows, k = static_cast<int>(blocks.size());
  Mat stacked(p, k * p);
  for (int l = 0; l < k; ++l) {
    if (blocks[static_cast<std::size_t>(l)].rows != p || blocks[static_cast<std::size_t>(l)].cols != p)
      input_error("coefficient blocks must all be p x p");
    for (int i = 0; i < p; ++i)
      for (int c = 0; c < p; ++c) stacked(i, l * p + c) = blocks[static_cast<std::size_t>(l)](i, c);
  }
  qcv_var* raw = nullptr;
  check(qcv_var_create(p, k, stacked.data(), &raw));
  return VarPtr(raw);
}

std::pair<int, int> parse_coef(const std::string& s, int r, int q) {
  const auto comma = s.find(',');
  int i = 0, j = 0;
  try {
    if (comma == std::string::npos) throw std::invalid_argument("missing comma");
    i = std::stoi(s.substr(0, comma));
    j = std::stoi(s.substr(comma + 1));
  } catch (const std::exception&) {
    input_error("--coef expects i,j (1-based), got '" + s + "'");
  }
  if (i < 1 || i > r || j < 1 || j > q)
    input_error("--coef " + s + " is outside A, which is " + std::to_string(r) + " x " +
                std::to_string(q));
  return {i - 1, j - 1};
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      input_error(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) input_error(std::string(what) + " is empty");
  return out;
}

struct Context {
  RunConfig cfg;
  Report report;
  std::string config_text;

  void echo(const std::string& key, const std::string& value) {
    report.meta.emplace_back(key, value);
    config_text += key + "=" + value + "\n";
  }
  void echo(const std::string& key, double value) { echo(key, number(value)); }
};

void finish_meta(Context& ctx) {
  ctx.report.meta.insert(ctx.report.meta.begin(),
                         {{"command", ctx.cfg.command}, {"version", qcv_version()},
                          {"seed", std::to_string(ctx.cfg.seed)},
                          {"config_hash", hex(fnv1a(ctx.config_text))}});
}

DataPtr load_data(Context& ctx) {
  if (ctx.cfg.data.empty()) input_error("--data is required");
  qcv_dataset* raw = nullptr;
  check(qcv_dataset_from_csv(ctx.cfg.data.c_str(), &raw));
  DataPtr ds(raw);
  int n = 0, p = 0;
  check(qcv_dataset_dims(ds.get(), &n, &p));
  Mat values(n, p);
  check(qcv_dataset_values(ds.get(), values.data()));
  std::string text;
  for (double x : values.v) text += number(x) + ";";
  std::string names;
  for (int j = 0; j < p; ++j) names += (j ? "," : "") + std::string(qcv_dataset_name(ds.get(), j));
  ctx.echo("data", ctx.cfg.data);
  ctx.echo("data_hash", hex(fnv1a(text)));
  ctx.echo("n", std::to_string(n));
  ctx.echo("p", std::to_string(p));
  ctx.echo("columns", names);
  for (int i = 0; i < qcv_dataset_notice_count(ds.get()); ++i)
    ctx.report.notes.push_back(qcv_dataset_notice(ds.get(), i));
  return ds;
}

int dataset_rows(const qcv_dataset* ds) {
  int n = 0, p = 0;
  check(qcv_dataset_dims(ds, &n, &p));
  return n;
}

int dataset_cols(const qcv_dataset* ds) {
  int n = 0, p = 0;
  check(qcv_dataset_dims(ds, &n, &p));
  return p;
}

qcv_lambda_space lambda_space(Context& ctx, int q, double rho) {
  qcv_lambda_space s{};
  s.family = family_code(ctx.cfg.family);
  s.q = q;
  s.rho = rho;
  s.step = ctx.cfg.grid_step;
  s.angle_step = ctx.cfg.angle_step;
  s.refine = ctx.cfg.no_refine ? 0 : 1;
  ctx.echo("family", ctx.cfg.family);
  ctx.echo("grid_step", ctx.cfg.grid_step > 0 ? number(ctx.cfg.grid_step) : "default");
  if (ctx.cfg.family != "scalar")
    ctx.echo("angle_step", ctx.cfg.angle_step > 0 ? number(ctx.cfg.angle_step) : "default");
  ctx.echo("refine", ctx.cfg.no_refine ? "false" : "true");
  return s;
}

void matrix_table(Report& r, const std::string& name, const Mat& m) {
  std::vector<std::string> cols{"row"};
  for (int j = 0; j < m.cols; ++j) cols.push_back("c" + std::to_string(j + 1));
  auto& t = r.add(name, cols);
  for (int i = 0; i < m.rows; ++i) {
    std::vector<Cell> row{static_cast<long long>(i + 1)};
    for (int j = 0; j < m.cols; ++j) row.emplace_back(m(i, j));
    t.rows.push_back(std::move(row));
  }
}

Mat split_field(const qcv_split* s, qcv_split_field field) {
  int rows = 0, cols = 0;
  check(qcv_split_shape(s, field, &rows, &cols));
  Mat m(rows, cols);
  if (rows * cols > 0) check(qcv_split_get(s, field, m.data()));
  return m;
}

struct RootRow {
  double re, im;
};

std::vector<RootRow> var_roots(const qcv_var* var) {
  int p = 0, k = 0;
  check(qcv_var_dims(var, &p, &k));
  std::vector<double> re(static_cast<std::size_t>(p * k)), im(re.size());
  check(qcv_roots(var, re.data(), im.data()));
  std::vector<RootRow> out;
  for (std::size_t i = 0; i < re.size(); ++i) out.push_back({re[i], im[i]});
  return out;
}

std::vector<RootRow> eigenvalues(const Mat& m) {
  qcv_var* raw = nullptr;
  check(qcv_var_create(m.rows, 1, m.data(), &raw));
  VarPtr var(raw);
  return var_roots(var.get());
}

double half_life_of(double modulus) {
  if (modulus >= 1.0) return INFINITY;
  if (modulus <= 0.0) return 0.0;
  double h = 0.0;
  check(qcv_radius_to_half_life(modulus, &h));
  return h;
}

// Root table with regions at rho; returns q, or -1 when some root is in neither region.
int roots_table(Context& ctx, const qcv_var* var, double rho, const std::string& name) {
  const auto rs = var_roots(var);
  std::vector<int> regions(rs.size(), QCV_REGION_NEITHER);
  int q = 0;
  const int status = qcv_classify(var, rho, &q, regions.data());
  if (status == QCV_ERR_INPUT) {
    ctx.report.notes.push_back(qcv_last_error());
    q = -1;
  } else {
    check(status);
  }
  auto& t = ctx.report.add(name, {"index", "re", "im", "modulus", "dist_to_one", "half_life",
                                  "region"});
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double mod = std::hypot(rs[i].re, rs[i].im);
    const double dist = std::hypot(1.0 - rs[i].re, rs[i].im);
    std::string region = q < 0                              ? "unclassified"
                         : regions[i] == QCV_REGION_LU     ? "lu"
                         : regions[i] == QCV_REGION_ST     ? "st"
                                                           : "neither";
    t.rows.push_back({static_cast<long long>(i + 1), rs[i].re, rs[i].im, mod, dist,
                      half_life_of(mod), region});
  }
  return q;
}

Mat fit_matrix(const qcv_fit* fit, int rows, int cols, int (*getter)(const qcv_fit*, double*)) {
  Mat m(rows, cols);
  if (rows * cols > 0) check(getter(fit, m.data()));
  return m;
}

VarPtr var_from_fit(const qcv_fit* fit) {
  int p = 0, k = 0;
  check(qcv_fit_dims(fit, &p, &k, nullptr, nullptr, nullptr));
  const Mat phi = fit_matrix(fit, p, k * p, qcv_fit_phi);
  qcv_var* raw = nullptr;
  check(qcv_var_create(p, k, phi.data(), &raw));
  return VarPtr(raw);
}

const char* status_name(int status) {
  switch (status) {
    case QCV_STATUS_CONVERGED: return "converged";
    case QCV_STATUS_MAX_ITER: return "max_iter";
    case QCV_STATUS_CONSTRAINT_INFEASIBLE: return "constraint_infeasible";
    default: return "unknown";
  }
}

// ---- commands

void cmd_roots(Context& ctx) {
  const double rho = resolved_rho(ctx.cfg);
  VarPtr var;
  if (!ctx.cfg.coeffs.empty()) {
    if (!ctx.cfg.data.empty()) input_error("give either --coeffs or --data, not both");
    var = parse_coefficients(ctx.cfg.coeffs);
    ctx.echo("coeffs", ctx.cfg.coeffs);
  } else {
    auto ds = load_data(ctx);
    ctx.echo("k", std::to_string(ctx.cfg.k));
    ctx.echo("det", ctx.cfg.det);
    qcv_fit* raw = nullptr;
    check(qcv_fit_ols(ds.get(), ctx.cfg.k, det_code(ctx.cfg.det), &raw));
    FitPtr fit(raw);
    var = var_from_fit(fit.get());
  }
  ctx.echo("rho", rho);
  const int q = roots_table(ctx, var.get(), rho, "roots");
  auto& s = ctx.report.add("summary", {"key", "value"});
  s.rows.push_back({std::string("rho"), rho});
  s.rows.push_back({std::string("half_life_of_rho"), half_life_of(rho)});
  if (q >= 0) s.rows.push_back({std::string("q"), static_cast<long long>(q)});
  if (q < 0) throw Failure{QCV_ERR_INPUT, ctx.report.notes.back()};
}

void cmd_fit(Context& ctx) {
  auto ds = load_data(ctx);
  const int p = dataset_cols(ds.get());
  const double rho = resolved_rho(ctx.cfg);
  const int det = det_code(ctx.cfg.det);
  ctx.echo("k", std::to_string(ctx.cfg.k));
  ctx.echo("det", ctx.cfg.det);
  ctx.echo("rho", rho);

  qcv_fit* raw = nullptr;
  check(qcv_fit_ols(ds.get(), ctx.cfg.k, det, &raw));
  FitPtr ols(raw);
  int k = 0, d = 0, nobs = 0;
  check(qcv_fit_dims(ols.get(), nullptr, &k, nullptr, &d, &nobs));
  for (int i = 0; i < qcv_fit_warning_count(ols.get()); ++i)
    ctx.report.notes.push_back(qcv_fit_warning(ols.get(), i));

  auto& s = ctx.report.add("summary", {"key", "value"});
  s.rows.push_back({std::string("nobs"), static_cast<long long>(nobs)});
  s.rows.push_back({std::string("ols_loglik"), qcv_fit_loglik(ols.get())});
  matrix_table(ctx.report, "ols_phi", fit_matrix(ols.get(), p, k * p, qcv_fit_phi));
  matrix_table(ctx.report, "ols_sigma", fit_matrix(ols.get(), p, p, qcv_fit_sigma));
  if (d > 0) matrix_table(ctx.report, "ols_deterministic", fit_matrix(ols.get(), p, d, qcv_fit_det_coeffs));

  VarPtr var = var_from_fit(ols.get());
  const int classified = roots_table(ctx, var.get(), rho, "ols_roots");
  int q = classified;
  if (ctx.cfg.q) {
    q = *ctx.cfg.q;
    if (q < 0 || q > p) input_error("--q must lie in [0, p]");
  } else if (classified < 0) {
    throw Failure{QCV_ERR_INPUT, ctx.report.notes.back() + " (give --q to proceed)"};
  }
  ctx.echo("q", std::to_string(q));
  s.rows.push_back({std::string("q"), static_cast<long long>(q)});

  auto& hl = ctx.report.add("half_lives", {"source", "modulus", "half_life"});
  hl.rows.push_back({std::string("rho"), rho, half_life_of(rho)});
  const auto rs = var_roots(var.get());
  for (int i = 0; i < q && i < static_cast<int>(rs.size()); ++i) {
    const double mod = std::hypot(rs[static_cast<std::size_t>(i)].re, rs[static_cast<std::size_t>(i)].im);
    hl.rows.push_back({"ols_root_" + std::to_string(i + 1), mod, half_life_of(mod)});
  }

  if (q == 0) {
    ctx.report.notes.push_back("no near-unity roots: the quasi-cointegrating space is all of R^p");
    return;
  }
  qcv_split* split_raw = nullptr;
  if (qcv_fit_split(ols.get(), q, &split_raw) == QCV_OK) {
    SplitPtr sp(split_raw);
    if (q < p) matrix_table(ctx.report, "ols_A", split_field(sp.get(), QCV_A));
    matrix_table(ctx.report, "ols_lambda_lu", split_field(sp.get(), QCV_LAMBDA_LU));
  } else {
    ctx.report.notes.push_back(std::string("OLS estimate does not split at q: ") + qcv_last_error());
  }

  const auto space = lambda_space(ctx, q, rho);
  check(qcv_fit_profile_lambda(ds.get(), ctx.cfg.k, det, &space, &raw));
  FitPtr prof(raw);
  for (int i = 0; i < qcv_fit_warning_count(prof.get()); ++i)
    ctx.report.notes.push_back(qcv_fit_warning(prof.get(), i));
  s.rows.push_back({std::string("profile_loglik"), qcv_fit_loglik(prof.get())});
  s.rows.push_back({std::string("profile_status"), std::string(status_name(qcv_fit_status(prof.get())))});
  s.rows.push_back({std::string("constraint_residual"), qcv_fit_constraint_residual(prof.get())});
  const Mat lambda = fit_matrix(prof.get(), q, q, qcv_fit_lambda);
  matrix_table(ctx.report, "profile_lambda_lu", lambda);
  const int r = p - q;
  if (r > 0) {
    const Mat A = fit_matrix(prof.get(), r, q, qcv_fit_A);
    matrix_table(ctx.report, "profile_A", A);
    Mat beta(p, r);
    for (int i = 0; i < r; ++i) beta(i, i) = 1.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < q; ++j) beta(r + j, i) = -A(i, j);
    matrix_table(ctx.report, "qcs_basis", beta);
  } else {
    ctx.report.notes.push_back("q = p: the quasi-cointegrating space is empty");
  }
  matrix_table(ctx.report, "profile_phi", fit_matrix(prof.get(), p, k * p, qcv_fit_phi));
  const auto eig = eigenvalues(lambda);
  for (std::size_t i = 0; i < eig.size(); ++i) {
    const double mod = std::hypot(eig[i].re, eig[i].im);
    hl.rows.push_back({"profile_lambda_" + std::to_string(i + 1), mod, half_life_of(mod)});
  }
}

void cmd_irf(Context& ctx) {
  VarPtr var;
  if (!ctx.cfg.coeffs.empty()) {
    if (!ctx.cfg.data.empty()) input_error("give either --coeffs or --data, not both");
    var = parse_coefficients(ctx.cfg.coeffs);
    ctx.echo("coeffs", ctx.cfg.coeffs);
  } else {
    auto ds = load_data(ctx);
    ctx.echo("k", std::to_string(ctx.cfg.k));
    ctx.echo("det", ctx.cfg.det);
    qcv_fit* raw = nullptr;
    check(qcv_fit_ols(ds.get(), ctx.cfg.k, det_code(ctx.cfg.det), &raw));
    FitPtr fit(raw);
    var = var_from_fit(fit.get());
  }
  int q = 0;
  if (ctx.cfg.q) {
    q = *ctx.cfg.q;
  } else {
    const double rho = resolved_rho(ctx.cfg);
    ctx.echo("rho", rho);
    check(qcv_classify(var.get(), rho, &q, nullptr));
  }
  if (ctx.cfg.horizon < 0) input_error("--horizon must be nonnegative");
  ctx.echo("q", std::to_string(q));
  ctx.echo("horizon", std::to_string(ctx.cfg.horizon));
  qcv_split* raw = nullptr;
  check(qcv_split_create(var.get(), q, &raw));
  SplitPtr sp(raw);
  for (int i = 0; i < qcv_split_warning_count(sp.get()); ++i)
    ctx.report.notes.push_back(qcv_split_warning(sp.get(), i));
  int p = 0;
  check(qcv_split_dims(sp.get(), &p, nullptr, nullptr));
  auto& t = ctx.report.add("irf", {"horizon", "response", "shock", "value", "lu", "st"});
  Mat value(p, p), lu(p, p), st(p, p);
  for (int h = 0; h <= ctx.cfg.horizon; ++h) {
    check(qcv_irf(sp.get(), h, value.data(), lu.data(), st.data()));
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        t.rows.push_back({static_cast<long long>(h), static_cast<long long>(i + 1),
                          static_cast<long long>(j + 1), value(i, j), lu(i, j), st(i, j)});
  }
}

Mat lambda0_matrix(const std::string& arg, int q) {
  if (arg.empty()) input_error("--lambda0 is required");
  Mat m = json_matrix(parse_json_arg(arg, "--lambda0"), "--lambda0");
  if (m.rows == 1 && m.cols == 1 && q > 1) {
    const double x = m(0, 0);
    m = Mat::identity(q);
    for (int i = 0; i < q; ++i) m(i, i) = x;
  }
  if (m.rows != q || m.cols != q) input_error("--lambda0 must be q x q");
  return m;
}

TablePtr open_table(const std::string& path) {
  qcv_table* raw = nullptr;
  check(qcv_table_read(path.c_str(), &raw));
  return TablePtr(raw);
}

std::vector<double> table_levels(const qcv_table* t) {
  int n = 0;
  check(qcv_table_info(t, nullptr, nullptr, nullptr, nullptr, nullptr, &n, nullptr));
  std::vector<double> levels(static_cast<std::size_t>(n));
  check(qcv_table_levels(t, levels.data()));
  return levels;
}

void cmd_lr(Context& ctx) {
  auto ds = load_data(ctx);
  const int p = dataset_cols(ds.get()), n = dataset_rows(ds.get());
  const double rho = resolved_rho(ctx.cfg);
  const int det = det_code(ctx.cfg.det);
  if (!ctx.cfg.q) input_error("--q is required");
  const int q = *ctx.cfg.q;
  if (q < 1 || q > p) input_error("--q must lie in [1, p]");
  ctx.echo("k", std::to_string(ctx.cfg.k));
  ctx.echo("det", ctx.cfg.det);
  ctx.echo("q", std::to_string(q));
  ctx.echo("rho", rho);
  const Mat lambda0 = lambda0_matrix(ctx.cfg.lambda0, q);
  ctx.echo("lambda0", ctx.cfg.lambda0);
  const auto space = lambda_space(ctx, q, rho);

  double lr = 0.0;
  check(qcv_lr_lambda(ds.get(), ctx.cfg.k, det, &space, lambda0.data(), &lr));
  auto& s = ctx.report.add("lr_lambda", {"key", "value"});
  s.rows.push_back({std::string("statistic"), lr});

  if (!ctx.cfg.table.empty()) {
    ctx.echo("table", ctx.cfg.table);
    auto table = open_table(ctx.cfg.table);
    Mat C(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) C(i, j) = n * (lambda0(i, j) - (i == j ? 1.0 : 0.0));
    Mat c_star = C;
    if (q > 1) {
      // Δ = L_luᵀ Σ L_lu from the fit restricted at Λ₀.
      qcv_fit* raw = nullptr;
      check(qcv_fit_profile(ds.get(), ctx.cfg.k, det, q, lambda0.data(), nullptr, &raw));
      FitPtr fit(raw);
      qcv_split* sraw = nullptr;
      check(qcv_fit_split(fit.get(), q, &sraw));
      SplitPtr sp(sraw);
      const Mat L = split_field(sp.get(), QCV_L_LU);
      const Mat sigma = fit_matrix(fit.get(), p, p, qcv_fit_sigma);
      const Mat delta = multiply(L, multiply(sigma, L), true);
      check(qcv_c_star(q, C.data(), delta.data(), c_star.data()));
    }
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        s.rows.push_back({"c_star_" + std::to_string(i + 1) + std::to_string(j + 1), c_star(i, j)});
    auto& crit = ctx.report.add("lr_lambda_critical", {"level", "critical", "exact_node", "reject"});
    for (double level : table_levels(table.get())) {
      double value = 0.0, distance = 0.0;
      int exact = 0;
      check(qcv_table_lookup(table.get(), c_star.data(), level, &value, &exact, &distance));
      if (q > 1 && !exact)
        ctx.report.notes.push_back("critical value at level " + number(level) +
                                   " taken from the nearest node, distance " + number(distance));
      crit.rows.push_back({level, value, std::string(exact ? "yes" : "no"),
                           std::string(lr > value ? "yes" : "no")});
    }
  }

  if (!ctx.cfg.coef.empty()) {
    const auto [i, j] = parse_coef(ctx.cfg.coef, p - q, q);
    if (!ctx.cfg.a0) input_error("--a0 is required with --coef for lr");
    ctx.echo("coef", ctx.cfg.coef);
    ctx.echo("a0", *ctx.cfg.a0);
    double lrc = 0.0;
    check(qcv_lr_coefficient(ds.get(), ctx.cfg.k, det, q, lambda0.data(), i, j, *ctx.cfg.a0, &lrc));
    auto& c = ctx.report.add("lr_coefficient", {"level", "statistic", "chi2_critical", "reject"});
    for (double level : {0.90, 0.95, 0.99}) {
      double crit = 0.0;
      check(qcv_chi2_quantile(level, 1.0, &crit));
      c.rows.push_back({level, lrc, crit, std::string(lrc > crit ? "yes" : "no")});
    }
  }
}

std::vector<double> parse_levels(const RunConfig& c) {
  auto levels = parse_list(c.levels, "--levels");
  for (double l : levels)
    if (!(l > 0.0 && l < 1.0)) input_error("levels must lie in (0, 1)");
  return levels;
}

// lo:hi:step
std::vector<double> parse_c_grid(const std::string& s) {
  std::vector<double> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      input_error("--c-grid expects lo:hi:step, got '" + s + "'");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    input_error("--c-grid expects lo:hi:step with lo <= hi and step > 0");
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (int i = 0; i <= count; ++i) out.push_back(parts[0] + i * parts[2]);
  if (parts[1] - out.back() > 1e-9 * std::max(1.0, std::abs(parts[1]))) out.push_back(parts[1]);
  return out;
}

void table_summary(Report& report, const qcv_table* table) {
  int q = 0, steps = 0, reps = 0, rows = 0;
  check(qcv_table_info(table, &q, nullptr, &steps, &reps, nullptr, nullptr, &rows));
  const auto levels = table_levels(table);
  std::vector<std::string> cols;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) cols.push_back("c" + std::to_string(i + 1) + std::to_string(j + 1));
  for (double l : levels) cols.push_back("q" + number(l));
  for (double l : levels) cols.push_back("se" + number(l));
  auto& t = report.add("quantiles", cols);
  Mat C(q, q);
  std::vector<double> quant(levels.size()), se(levels.size());
  for (int r = 0; r < rows; ++r) {
    check(qcv_table_row(table, r, C.data(), quant.data(), se.data()));
    std::vector<Cell> row;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) row.emplace_back(C(i, j));
    for (double x : quant) row.emplace_back(x);
    for (double x : se) row.emplace_back(x);
    t.rows.push_back(std::move(row));
  }
}

TablePtr build_table(Context& ctx, int q, int det, const std::vector<double>& grid_values,
                     const std::vector<double>& levels) {
  qcv_table_config config{q, det, ctx.cfg.steps, ctx.cfg.reps, ctx.cfg.seed, levels.data(),
                          static_cast<int>(levels.size())};
  const int n_grid = static_cast<int>(grid_values.size()) / (q * q);
  qcv_table* raw = nullptr;
  check(qcv_table_build(&config, grid_values.data(), n_grid, ctx.cfg.table.c_str(), &raw));
  return TablePtr(raw);
}

void cmd_critvals(Context& ctx) {
  if (ctx.cfg.table.empty()) input_error("--table PATH is required for the output file");
  const int q = ctx.cfg.q.value_or(1);
  if (q < 1) input_error("--q must be positive");
  const int det = det_code(ctx.cfg.det);
  const auto levels = parse_levels(ctx.cfg);
  std::vector<double> grid;
  if (!ctx.cfg.c_nodes.empty()) {
    const json j = parse_json_arg(ctx.cfg.c_nodes, "--c-nodes");
    if (!j.is_array() || j.empty()) input_error("--c-nodes must be a nonempty array of q x q matrices");
    for (const auto& node : j) {
      const Mat m = json_matrix(node, "C node");
      if (m.rows != q || m.cols != q) input_error("every C node must be q x q");
      grid.insert(grid.end(), m.v.begin(), m.v.end());
    }
    ctx.echo("c_nodes", ctx.cfg.c_nodes);
  } else {
    if (q != 1) input_error("q >= 2 tables need an explicit --c-nodes list");
    if (ctx.cfg.c_grid.empty()) input_error("--c-grid lo:hi:step or --c-nodes is required");
    grid = parse_c_grid(ctx.cfg.c_grid);
    ctx.echo("c_grid", ctx.cfg.c_grid);
  }
  ctx.echo("q", std::to_string(q));
  ctx.echo("det", ctx.cfg.det);
  ctx.echo("steps", std::to_string(ctx.cfg.steps));
  ctx.echo("reps", std::to_string(ctx.cfg.reps));
  ctx.echo("levels", ctx.cfg.levels);
  ctx.echo("table", ctx.cfg.table);
  auto table = build_table(ctx, q, det, grid, levels);
  table_summary(ctx.report, table.get());
}

void interval_rows(Table& t, const qcv_ci* ci, const std::string& label) {
  for (int i = 0; i < qcv_ci_interval_count(ci); ++i) {
    double lo = 0, hi = 0;
    int lu = 0, hu = 0;
    check(qcv_ci_interval(ci, i, &lo, &hi, &lu, &hu));
    t.rows.push_back({label, lu ? -INFINITY : lo, hu ? INFINITY : hi});
  }
}

void cmd_ci(Context& ctx) {
  auto ds = load_data(ctx);
  const int p = dataset_cols(ds.get()), n = dataset_rows(ds.get());
  const double rho = resolved_rho(ctx.cfg);
  const int det = det_code(ctx.cfg.det);
  if (!ctx.cfg.q) input_error("--q is required");
  const int q = *ctx.cfg.q;
  if (q < 1 || q > p) input_error("--q must lie in [1, p]");
  const double a1 = ctx.cfg.alpha1, a2 = ctx.cfg.alpha2;
  if (!(a1 > 0 && a1 < 1) || !(a2 > 0 && a2 < 1) || !(a1 + a2 < 1))
    input_error("--alpha1 and --alpha2 must lie in (0, 1) with alpha1 + alpha2 < 1");
  ctx.echo("k", std::to_string(ctx.cfg.k));
  ctx.echo("det", ctx.cfg.det);
  ctx.echo("q", std::to_string(q));
  ctx.echo("rho", rho);
  ctx.echo("alpha1", a1);
  ctx.echo("alpha2", a2);
  if (ctx.cfg.table.empty()) input_error("--table PATH is required");
  ctx.echo("table", ctx.cfg.table);

  TablePtr table;
  if (std::filesystem::exists(ctx.cfg.table)) {
    table = open_table(ctx.cfg.table);
  } else {
    if (!ctx.cfg.build_table)
      input_error("table " + ctx.cfg.table +
                  " does not exist; build it with the critvals command or pass --build-table");
    if (q != 1) input_error("automatic tables cover q = 1 only; run critvals with --c-nodes");
    const double step = ctx.cfg.c_step;
    if (!(step > 0)) input_error("--c-step must be positive");
    const double lo = std::floor(n * (rho - 1.0) / step) * step - step;
    std::vector<double> levels{1.0 - a1};
    std::vector<double> grid;
    for (double c = lo; c <= 1e-9; c += step) grid.push_back(std::abs(c) < 1e-12 ? 0.0 : c);
    ctx.echo("steps", std::to_string(ctx.cfg.steps));
    ctx.echo("reps", std::to_string(ctx.cfg.reps));
    ctx.echo("c_step", step);
    ctx.report.notes.push_back("built quantile table " + ctx.cfg.table + " over C in [" +
                               number(lo) + ", 0]");
    table = build_table(ctx, 1, det, grid, levels);
  }
  const auto space = lambda_space(ctx, q, rho);

  auto& s = ctx.report.add("summary", {"key", "value"});
  CiPtr set;
  qcv_ci* raw = nullptr;
  if (ctx.cfg.coef.empty()) {
    check(qcv_ci_lambda(ds.get(), ctx.cfg.k, det, &space, a1, table.get(), &raw));
    set.reset(raw);
    s.rows.push_back({std::string("lambda_level"), 1.0 - a1});
  } else {
    const auto [i, j] = parse_coef(ctx.cfg.coef, p - q, q);
    ctx.echo("coef", ctx.cfg.coef);
    check(qcv_ci_bonferroni(ds.get(), ctx.cfg.k, det, &space, a1, a2, i, j, table.get(), &raw));
    set.reset(raw);
    s.rows.push_back({std::string("lambda_level"), 1.0 - a1});
    s.rows.push_back({std::string("conditional_level"), 1.0 - a2});
    s.rows.push_back({std::string("overall_level"), 1.0 - a1 - a2});
    s.rows.push_back({std::string("coefficient"), "A[" + ctx.cfg.coef + "]"});
    s.rows.push_back({std::string("fallback"), std::string(qcv_ci_fallback(set.get()) ? "yes" : "no")});
    ctx.report.notes.push_back("Bonferroni set for A[" + ctx.cfg.coef + "] has overall level " +
                               number(100.0 * (1.0 - a1 - a2)) + "% (alpha = alpha1 + alpha2 = " +
                               number(a1 + a2) + ")");
  }
  for (int i = 0; i < qcv_ci_warning_count(set.get()); ++i)
    ctx.report.notes.push_back(qcv_ci_warning(set.get(), i));

  std::vector<std::string> cols;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) cols.push_back("lambda" + std::to_string(i + 1) + std::to_string(j + 1));
  for (const char* c : {"lr", "critical", "accepted", "ok"}) cols.emplace_back(c);
  auto& nodes = ctx.report.add("lambda_nodes", cols);
  Mat lam(q, q);
  int accepted_count = 0;
  for (int idx = 0; idx < qcv_ci_node_count(set.get()); ++idx) {
    double lr = 0, crit = 0;
    int acc = 0, ok = 0;
    check(qcv_ci_node(set.get(), idx, lam.data(), &lr, &crit, &acc, &ok));
    std::vector<Cell> row;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) row.emplace_back(lam(i, j));
    row.emplace_back(lr);
    row.emplace_back(crit);
    row.emplace_back(std::string(acc ? "yes" : "no"));
    row.emplace_back(std::string(ok ? "yes" : "no"));
    nodes.rows.push_back(std::move(row));
    accepted_count += acc;
  }
  s.rows.push_back({std::string("accepted_lambda_nodes"), static_cast<long long>(accepted_count)});

  if (ctx.cfg.coef.empty()) {
    if (q == 1) {
      auto& t = ctx.report.add("lambda_set", {"set", "lo", "hi"});
      interval_rows(t, set.get(), "lambda");
    }
    return;
  }
  auto& cond = ctx.report.add("conditional", [&] {
    std::vector<std::string> c;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) c.push_back("lambda" + std::to_string(i + 1) + std::to_string(j + 1));
    c.emplace_back("lo");
    c.emplace_back("hi");
    return c;
  }());
  for (int idx = 0; idx < qcv_ci_conditional_count(set.get()); ++idx) {
    double lo = 0, hi = 0;
    int unb = 0;
    check(qcv_ci_conditional(set.get(), idx, lam.data(), &lo, &hi, &unb));
    std::vector<Cell> row;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) row.emplace_back(lam(i, j));
    row.emplace_back(unb ? -INFINITY : lo);
    row.emplace_back(unb ? INFINITY : hi);
    cond.rows.push_back(std::move(row));
  }
  auto& b = ctx.report.add("bonferroni_set", {"set", "lo", "hi"});
  interval_rows(b, set.get(), "piece");
  if (qcv_ci_interval_count(set.get()) > 0) {
    double lo = 0, hi = 0;
    int lu = 0, hu = 0;
    check(qcv_ci_hull(set.get(), &lo, &hi, &lu, &hu));
    b.rows.push_back({std::string("hull"), lu ? -INFINITY : lo, hu ? INFINITY : hi});
  }
}

Mat vector_arg(const std::string& arg, int p, const char* what) {
  if (arg.empty()) return Mat(p, 1);
  Mat m = json_matrix(parse_json_arg(arg, what), what);
  if (m.rows * m.cols != p) input_error(std::string(what) + " must have p entries");
  m.rows = p;
  m.cols = 1;
  return m;
}

void cmd_simulate(Context& ctx) {
  if (ctx.cfg.coeffs.empty()) input_error("--coeffs is required");
  if (ctx.cfg.n < 1) input_error("--n must be positive");
  VarPtr var = parse_coefficients(ctx.cfg.coeffs);
  int p = 0, k = 0;
  check(qcv_var_dims(var.get(), &p, &k));
  Mat sigma = Mat::identity(p);
  if (!ctx.cfg.sigma.empty()) {
    sigma = json_matrix(parse_json_arg(ctx.cfg.sigma, "--sigma"), "--sigma");
    if (sigma.rows != p || sigma.cols != p) input_error("--sigma must be p x p");
  }
  const Mat mu = vector_arg(ctx.cfg.mu, p, "--mu");
  const Mat delta = vector_arg(ctx.cfg.delta, p, "--delta");
  ctx.echo("coeffs", ctx.cfg.coeffs);
  ctx.echo("sigma", ctx.cfg.sigma.empty() ? "identity" : ctx.cfg.sigma);
  ctx.echo("mu", ctx.cfg.mu.empty() ? "0" : ctx.cfg.mu);
  ctx.echo("delta", ctx.cfg.delta.empty() ? "0" : ctx.cfg.delta);
  ctx.echo("n", std::to_string(ctx.cfg.n));
  ctx.echo("zero_noise", ctx.cfg.zero_noise ? "true" : "false");
  Mat y(ctx.cfg.n, p), eps(ctx.cfg.n, p);
  check(qcv_simulate(var.get(), sigma.data(), mu.data(), delta.data(), ctx.cfg.n, ctx.cfg.seed,
                     ctx.cfg.zero_noise ? 1 : 0, y.data(), eps.data()));
  std::vector<std::string> cols;
  for (int j = 0; j < p; ++j) cols.push_back("y" + std::to_string(j + 1));
  if (ctx.cfg.with_eps)
    for (int j = 0; j < p; ++j) cols.push_back("eps" + std::to_string(j + 1));
  auto& t = ctx.report.add("path", cols);
  for (int i = 0; i < ctx.cfg.n; ++i) {
    std::vector<Cell> row;
    for (int j = 0; j < p; ++j) row.emplace_back(y(i, j));
    if (ctx.cfg.with_eps)
      for (int j = 0; j < p; ++j) row.emplace_back(eps(i, j));
    t.rows.push_back(std::move(row));
  }
}

void emit(const Context& ctx) {
  std::string text;
  if (ctx.cfg.format == "json") {
    text = render_json(ctx.report);
  } else if (ctx.cfg.format == "csv") {
    text = render_csv(ctx.report);
  } else {
    text = render_text(ctx.report);
  }
  if (ctx.cfg.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(ctx.cfg.output, std::ios::binary);
  if (!out) throw Failure{QCV_ERR_INTERNAL, "cannot write " + ctx.cfg.output};
  out << text;
  if (!out) throw Failure{QCV_ERR_INTERNAL, "cannot write " + ctx.cfg.output};
}

void add_output(CLI::App* sub, RunConfig& c) {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  sub->add_option("--output,-o", c.output, "Write the output to this file instead of stdout");
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

void add_model(CLI::App* sub, RunConfig& c) {
  sub->add_option("--k", c.k, "Lag order")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--det", c.det, "Deterministic terms: trend, const or none")
      ->check(CLI::IsMember({"trend", "const", "none"}))
      ->capture_default_str();
}

void add_space(CLI::App* sub, RunConfig& c) {
  sub->add_option("--q", c.q, "Number of near-unity roots");
  sub->add_option("--rho", c.rho, "Radius separating near-unity from stable roots");
  sub->add_option("--half-life", c.half_life, "Half-life h, giving rho = 2^(-1/h)");
  sub->add_option("--family", c.family, "Lambda family: scalar, symmetric or normal")
      ->check(CLI::IsMember({"scalar", "symmetric", "normal"}))
      ->capture_default_str();
  sub->add_option("--grid-step", c.grid_step, "Eigenvalue grid spacing");
  sub->add_option("--angle-step", c.angle_step, "Rotation-angle grid spacing");
  sub->add_flag("--no-refine", c.no_refine, "Skip polishing the best grid point");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inference on the quasi-cointegrating space of near-unit-root VARs"};
  app.set_version_flag("--version", qcv_version());
  app.require_subcommand(1);
  RunConfig cfg;

  auto* roots = app.add_subcommand("roots", "Characteristic roots and their classification");
  roots->add_option("--coeffs", cfg.coeffs, "Inline coefficient JSON or @file");
  roots->add_option("--data", cfg.data, "CSV data file (roots of the OLS estimate)");
  add_model(roots, cfg);
  add_space(roots, cfg);
  add_output(roots, cfg);

  auto* fit = app.add_subcommand("fit", "OLS and profile-likelihood estimates");
  fit->add_option("--data", cfg.data, "CSV data file")->required();
  add_model(fit, cfg);
  add_space(fit, cfg);
  add_output(fit, cfg);

  auto* irf = app.add_subcommand("irf", "Impulse responses split into near-unity and stable parts");
  irf->add_option("--coeffs", cfg.coeffs, "Inline coefficient JSON or @file");
  irf->add_option("--data", cfg.data, "CSV data file (responses of the OLS estimate)");
  irf->add_option("--horizon", cfg.horizon, "Largest horizon")->capture_default_str();
  add_model(irf, cfg);
  add_space(irf, cfg);
  add_output(irf, cfg);

  auto* lr = app.add_subcommand("lr", "Likelihood-ratio statistics");
  lr->add_option("--data", cfg.data, "CSV data file")->required();
  lr->add_option("--lambda0", cfg.lambda0, "Hypothesized Lambda (JSON matrix or scalar)")->required();
  lr->add_option("--coef", cfg.coef, "Coefficient i,j of A (1-based)");
  lr->add_option("--a0", cfg.a0, "Hypothesized value of the coefficient");
  lr->add_option("--table", cfg.table, "Quantile table for critical values");
  add_model(lr, cfg);
  add_space(lr, cfg);
  add_output(lr, cfg);

  auto* ci = app.add_subcommand("ci", "Confidence sets for Lambda and Bonferroni sets for A");
  ci->add_option("--data", cfg.data, "CSV data file")->required();
  ci->add_option("--alpha1", cfg.alpha1, "Level of the Lambda set is 1 - alpha1")->capture_default_str();
  ci->add_option("--alpha2", cfg.alpha2, "Level of each conditional interval is 1 - alpha2")
      ->capture_default_str();
  ci->add_option("--coef", cfg.coef, "Coefficient i,j of A (1-based)");
  ci->add_option("--table", cfg.table, "Quantile table");
  ci->add_flag("--build-table", cfg.build_table, "Build the table if it does not exist (q = 1)");
  ci->add_option("--steps", cfg.steps, "Discretization steps for a built table")->capture_default_str();
  ci->add_option("--reps", cfg.reps, "Replications for a built table")->capture_default_str();
  ci->add_option("--c-step", cfg.c_step, "C spacing for a built table")->capture_default_str();
  add_model(ci, cfg);
  add_space(ci, cfg);
  add_output(ci, cfg);

  auto* critvals = app.add_subcommand("critvals", "Build or extend a quantile table");
  critvals->add_option("--table", cfg.table, "Table file (resumed if present)")->required();
  critvals->add_option("--q", cfg.q, "Dimension of C");
  critvals->add_option("--det", cfg.det, "Deterministic terms: trend, const or none")
      ->check(CLI::IsMember({"trend", "const", "none"}))
      ->capture_default_str();
  critvals->add_option("--steps", cfg.steps, "Discretization steps")->capture_default_str();
  critvals->add_option("--reps", cfg.reps, "Replications per node")->capture_default_str();
  critvals->add_option("--levels", cfg.levels, "Comma-separated quantile levels")->capture_default_str();
  critvals->add_option("--c-grid", cfg.c_grid, "Scalar grid lo:hi:step (q = 1)");
  critvals->add_option("--c-nodes", cfg.c_nodes, "JSON list of q x q matrices or @file");
  add_output(critvals, cfg);

  auto* simulate = app.add_subcommand("simulate", "Simulate a path from given coefficients");
  simulate->add_option("--coeffs", cfg.coeffs, "Inline coefficient JSON or @file")->required();
  simulate->add_option("--n", cfg.n, "Path length")->required();
  simulate->add_option("--sigma", cfg.sigma, "Innovation covariance (JSON matrix)");
  simulate->add_option("--mu", cfg.mu, "Intercept (JSON vector)");
  simulate->add_option("--delta", cfg.delta, "Trend slope (JSON vector)");
  simulate->add_flag("--zero-noise", cfg.zero_noise, "Set all innovations to zero");
  simulate->add_flag("--with-eps", cfg.with_eps, "Include the innovations in the output");
  add_output(simulate, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : QCV_ERR_INPUT;
  }

  Context ctx;
  ctx.cfg = cfg;
  ctx.cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (ctx.cfg.command == "roots") cmd_roots(ctx);
    else if (ctx.cfg.command == "fit") cmd_fit(ctx);
    else if (ctx.cfg.command == "irf") cmd_irf(ctx);
    else if (ctx.cfg.command == "lr") cmd_lr(ctx);
    else if (ctx.cfg.command == "ci") cmd_ci(ctx);
    else if (ctx.cfg.command == "critvals") cmd_critvals(ctx);
    else if (ctx.cfg.command == "simulate") cmd_simulate(ctx);
    finish_meta(ctx);
    emit(ctx);
  } catch (const Failure& f) {
    std::cerr << "qcvar " << ctx.cfg.command << ": error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "qcvar " << ctx.cfg.command << ": internal error: " << e.what() << '\n';
    return QCV_ERR_INTERNAL;
  }
  return 0;
}
