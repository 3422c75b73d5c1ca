#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vretrain {

enum class ErrorKind {
  InvalidBounds,
  NumericallyDegenerate,
  QuadratureNonconvergence,
  DimensionMismatch,
  NonUnitDirection,
  RankDeficient,
  MaxAttemptsExceeded,
  InvalidArgument,
  InsufficientRounds,
  SeedSpaceExhausted,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the
/// harness in particular) can classify it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidBounds: return "invalid-bounds";
    case ErrorKind::NumericallyDegenerate: return "numerically-degenerate";
    case ErrorKind::QuadratureNonconvergence: return "quadrature-nonconvergence";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonUnitDirection: return "non-unit-direction";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::MaxAttemptsExceeded: return "max-attempts-exceeded";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InsufficientRounds: return "insufficient-rounds";
    case ErrorKind::SeedSpaceExhausted: return "seed-space-exhausted";
    case ErrorKind::ConfigError: return "config-error";
  }
  return "unknown";
}

}  // namespace vretrain
