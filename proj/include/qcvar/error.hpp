#pragma once

#include <stdexcept>
#include <string>

namespace qcvar {

enum class ErrorKind {
  input,           // malformed arguments, dimensions or data
  numerical,       // a linear-algebra kernel failed
  separation,      // large and small roots cannot be told apart
  normalization,   // the last q rows of the lu basis are singular
  classification,  // a root lies in neither spectral region
  domain,          // parameter outside its admissible set
  construction,    // DGP construction ran out of retries
  table_coverage,  // quantile table cannot answer the query
  io,
  internal,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qcvar
