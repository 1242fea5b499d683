#pragma once

#include <stdexcept>
#include <string>

namespace ihsim {

// Invalid configuration or parameterization. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite state detected while integrating. CLI maps this to exit code 2.
struct NumericError : std::runtime_error {
  double at_time;
  NumericError(const std::string& what, double t)
      : std::runtime_error(what), at_time(t) {}
};

}  // namespace ihsim
