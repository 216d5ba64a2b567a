#pragma once

#include <stdexcept>
#include <string>

namespace wickholder {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operands live on spaces of different dimension.
struct DimensionError : Error {
  using Error::Error;
};

// A result degree would exceed the expansion's degree cap. Products never
// truncate silently; they throw this instead.
struct CapacityError : Error {
  using Error::Error;
};

// Invalid parameter combination: out-of-range exponents, malformed input,
// eigenvalues outside a named constructor's contract.
struct ConfigError : Error {
  using Error::Error;
};

// Parameters fail an admissibility inequality; the message names it.
struct InadmissibleError : Error {
  using Error::Error;
};

// Operation requires the equality (boundary) case of the operator condition.
struct NotOnBoundaryError : Error {
  using Error::Error;
};

// Sharpness probe invoked on an admissible configuration: nothing to witness.
struct NoWitnessError : Error {
  using Error::Error;
};

// Gaussian integral with an identically zero coefficient vector.
struct DegenerateIntegralError : Error {
  using Error::Error;
};

// Requested evaluation grid or sample count exceeds the work budget.
struct BudgetError : Error {
  using Error::Error;
};

// Operator must be invertible but has a zero eigenvalue.
struct SingularOperatorError : Error {
  using Error::Error;
};

}  // namespace wickholder
