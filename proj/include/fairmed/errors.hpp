#pragma once

#include <stdexcept>
#include <string>

namespace fairmed {

// Malformed input data or configuration (CSV rows, matrices, policy specs).
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structural contract between components is broken (length mismatch,
// flow conservation failure, invalid plan).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller violated an operation precondition.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The fairness policy admits no assignment for this instance.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Brute-force enumeration refused: instance exceeds the configured limits.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An internal invariant failed; indicates a bug or a violated metric
// assumption upstream.
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fairmed
