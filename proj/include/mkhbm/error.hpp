// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mkhbm {

enum class ErrorKind {
  Dimension,
  Singular,
  Parameter,
  NonDiagonalizable,
  Precondition,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception type thrown by every mkhbm operation. The kind lets callers (the
/// CLI in particular) map failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace mkhbm
