// errors.hpp -- error taxonomy shared across the library.
//
// The CLI maps these onto distinct exit codes (see tools/qerase_main.cpp
// and README.md).

#pragma once

#include <stdexcept>
#include <string>

namespace qerase {

// Bad arguments: out-of-range indices, malformed configuration.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested discretization level exceeds the dense-enumeration cap.
struct SizeError : ValidationError {
  using ValidationError::ValidationError;
};

// Predecessor query for a target state that is unreachable under the
// given input.
struct UnreachableTargetError : ValidationError {
  using ValidationError::ValidationError;
};

// Fixed-point iteration failed to reach tolerance within the cap.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed machine/trace documents, or unknown variable names in a joint.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An empirical estimator has too few qualifying samples.
struct SampleSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation's precondition does not hold for the given machine.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two independent evaluation routes disagree beyond tolerance.
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qerase
