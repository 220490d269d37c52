#include "qcvar/dataset.hpp"

#include "qcvar/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace qcvar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool is_missing(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  return l.empty() || l == "na" || l == "nan" || l == "null" || l == "." || l == "n/a";
}

std::optional<double> to_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
  std::vector<std::string> header;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (header.empty()) {
      header = split_fields(line);
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::input, source + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
    rows.push_back(std::move(fields));
    line_numbers.push_back(lineno);
  }
  if (header.empty()) throw Error(ErrorKind::input, source + ": file is empty");
  if (rows.empty()) throw Error(ErrorKind::input, source + ": no data rows");

  Dataset out;
  out.source = source;
  std::size_t first_col = 0;
  if (header.size() > 1) {
    const bool label_column = std::any_of(rows.begin(), rows.end(), [](const auto& r) {
      return !is_missing(r[0]) && !to_number(r[0]).has_value();
    });
    if (label_column) {
      first_col = 1;
      out.notices.push_back("dropped non-numeric first column '" + header[0] + "'");
    }
  }
  const auto p = header.size() - first_col;
  out.names.assign(header.begin() + static_cast<long>(first_col), header.end());
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  std::vector<std::string> missing, bad;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = first_col; c < header.size(); ++c) {
      const std::string& cell = rows[r][c];
      const std::string where = "line " + std::to_string(line_numbers[r]) + " column '" + header[c] + "'";
      if (is_missing(cell)) {
        missing.push_back(where);
        continue;
      }
      const auto v = to_number(cell);
      if (!v) {
        bad.push_back(where + " ('" + cell + "')");
        continue;
      }
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - first_col)) = *v;
    }
  }
  auto report = [&](const std::vector<std::string>& cells, const std::string& what) {
    std::ostringstream msg;
    msg << source << ": " << cells.size() << " " << what << " cell(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(cells.size(), 20); ++i) msg << " " << cells[i] << ";";
    if (cells.size() > 20) msg << " ...";
    throw Error(ErrorKind::input, msg.str());
  };
  if (!missing.empty()) report(missing, "missing");
  if (!bad.empty()) report(bad, "non-numeric");
  return out;
}

Dataset ingest_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, "cannot open data file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path);
}

std::string format_csv(const std::vector<std::string>& names, const Matrix& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << "\n";
  char buf[40];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.15g", values(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace qcvar
