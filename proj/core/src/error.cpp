#include "alrn/error.hpp"

#include <fmt/format.h>

namespace alrn {

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCategory::io, fmt::format("line {}: {}", line, message)), line_(line) {}

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::io:
    case ErrorCategory::config:
      return 1;
    case ErrorCategory::validation:
      return 2;
    case ErrorCategory::backend:
      return 3;
  }
  return 1;
}

}  // namespace alrn
