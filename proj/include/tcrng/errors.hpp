#pragma once

#include <stdexcept>
#include <string>

namespace tcrng {

// Invalid symbol, malformed model, inconsistent arguments.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Index outside [0, |T|) and similar.
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Exhaustive enumeration would exceed the configured bound.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unusable target set or experiment configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A sequential generator ran out of input before it could decide.
struct InputExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tcrng
