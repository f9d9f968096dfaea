#pragma once

#include <stdexcept>

namespace entangle {

// Invalid arguments: dimensions, labels, parameter ranges.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A requested tensor size exceeds the configured capacity.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A filter mapped the state to (numerically) zero, so the conditional output
// state does not exist.
struct FilterAnnihilationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was invoked without an obligation it depends on, e.g. a
// witness built from a state lacking an entanglement-fraction certificate.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical breakdown (failed decompositions and the like).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace entangle
