#pragma once

#include <stdexcept>
#include <string>

namespace cavitydtc {

/// Invalid user input: bad config keys, out-of-range parameters, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The integrator or a solver could not produce a finite / converged result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cavitydtc
