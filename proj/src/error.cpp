// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/error.hpp"

namespace mkhbm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::NonDiagonalizable: return "non-diagonalizable";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace mkhbm
