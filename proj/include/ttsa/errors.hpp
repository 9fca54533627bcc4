#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ttsa {

// Error taxonomy. The CLI maps ValidationError to exit code 1 and
// NumericalError to exit code 2; anything else escaping is a plain bug.

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

// alpha == beta: the fast/slow split is gone and the rate constants are
// undefined (they all divide by alpha - beta somewhere).
struct DegenerateTimescales : ValidationError {
  using ValidationError::ValidationError;
};

struct MissingNoise : ValidationError {
  using ValidationError::ValidationError;
};

struct DegenerateWindow : ValidationError {
  using ValidationError::ValidationError;
};

struct SingularMatrix : NumericalError {
  explicit SingularMatrix(const std::string& which)
      : NumericalError("matrix is numerically singular: " + which) {}
};

struct AssumptionViolated : NumericalError {
  using NumericalError::NumericalError;
};

struct CapExceeded : NumericalError {
  CapExceeded(const std::string& scan_name, std::uint64_t cap)
      : NumericalError(scan_name + ": forward scan exceeded cap of " +
                       std::to_string(cap) + " steps") {}
};

struct NonFinite : NumericalError {
  std::uint64_t index;
  explicit NonFinite(std::uint64_t n)
      : NumericalError("non-finite iterate at index " + std::to_string(n)),
        index(n) {}
};

struct NotErgodic : NumericalError {
  using NumericalError::NumericalError;
};

struct RankDeficient : NumericalError {
  using NumericalError::NumericalError;
};

struct GenerationFailed : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace ttsa
