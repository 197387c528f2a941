// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pinchopt {

// Bad configuration values or arguments outside a routine's contract.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative routine could not reach its accuracy target, or the
// geometry makes the requested quantity ill-defined.  Carries the last
// residual (or other defect measure) for diagnostics.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace pinchopt
