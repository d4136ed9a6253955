#pragma once

#include <stdexcept>
#include <string>

namespace msp {

// Malformed input files, invalid configuration values and other problems the
// caller can fix. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension disagreement between tensors handed to a numeric routine.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace msp
