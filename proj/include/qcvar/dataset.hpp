#pragma once

#include "qcvar/linalg.hpp"

#include <string>
#include <vector>

namespace qcvar {

struct Dataset {
  std::vector<std::string> names;
  Matrix values;  // n × p
  std::string source;
  std::vector<std::string> notices;
};

/// Comma-separated file with a header row. A first column holding any
/// non-numeric entry (dates, labels) is dropped with a notice. Lines starting
/// with # are comments.
Dataset ingest_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Writes `values` with a header row; numbers use 15 significant digits.
std::string format_csv(const std::vector<std::string>& names, const Matrix& values);

}  // namespace qcvar
