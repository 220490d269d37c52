#include "qcvar/error.hpp"

namespace qcvar {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::separation: return "separation";
    case ErrorKind::normalization: return "normalization";
    case ErrorKind::classification: return "classification";
    case ErrorKind::domain: return "domain";
    case ErrorKind::construction: return "construction";
    case ErrorKind::table_coverage: return "table-coverage";
    case ErrorKind::io: return "io";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace qcvar
