#pragma once

#include <stdexcept>
#include <string>

namespace pqlab {

/// Bad input: non-finite values, exponents out of range, mismatched meshes.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is not defined for this integrand family (e.g. a conjugate
/// of a non-radial density).
class UnsupportedFlavor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A self-check failed. Either a bug or a structural invariant that should
/// have held by construction.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The minimizer could not make progress (e.g. no descent along a
/// preconditioned direction, typically a non-convex density).
class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pqlab
