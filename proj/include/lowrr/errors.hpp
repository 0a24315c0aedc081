#pragma once

#include <stdexcept>
#include <string>

namespace lowrr {

/// Bad inputs: malformed files, dimension mismatches, domain violations.
/// CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: non-convergence, ill-posed subproblem.
/// CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lowrr
