#pragma once

#include <stdexcept>
#include <string>

namespace recur {

// Input data violated the schema or a dataset invariant. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, singular information, divergent coefficient.
// CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace recur
