#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmmot {

enum class ErrorKind {
  kInvalidInput,
  kDimensionMismatch,
  kNumericalFailure,
  kDegenerateSource,
  kDensityUndefined,
  kSizeLimit,
  kIo,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kNumericalFailure: return "numerical-failure";
    case ErrorKind::kDegenerateSource: return "degenerate-source";
    case ErrorKind::kDensityUndefined: return "density-undefined";
    case ErrorKind::kSizeLimit: return "size-limit";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace gmmot
