#pragma once

#include <stdexcept>
#include <string>

namespace pcl {

// Error taxonomy shared by the whole library.
//
// DomainError       - input outside the mathematical domain (inadmissible
//                     tuple, q <= 0, ratio of incompatible kinds, ...).
// PreconditionError - structurally valid input that violates a documented
//                     operation precondition (P0 below the ramified primes,
//                     non-squarefree d where squarefree is required, ...).
// CapacityError     - size parameter beyond the supported range (k too
//                     large, interval too short to seat a tuple, ...).
// ResourceError     - the request would exceed the configured memory or
//                     work budget; never silently truncated.
// OverflowError     - checked 64-bit arithmetic overflowed.
// ParseError        - malformed tuple / config / file input.
//
// The CLI maps DomainError/PreconditionError/CapacityError/ParseError to
// exit code 2 (usage), ResourceError/OverflowError likewise to 2; internal
// verification failures (pigeonhole violations, selfcheck mismatches) are
// reported in results and exit with code 1.

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pcl
