#pragma once

#include <stdexcept>
#include <string>

namespace fpxl {

// Error taxonomy. The CLI maps these onto distinct exit codes:
// usage -> 2, hypothesis -> 3, numerical -> 4.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested fibering branch has no root for the given direction.
// Carries the no-root diagnostics in the message.
struct BranchUnavailableError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace fpxl
