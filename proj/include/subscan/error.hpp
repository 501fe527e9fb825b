#pragma once

#include <stdexcept>
#include <string>

namespace subscan {

// Malformed or unreadable input (files, CSV content, CLI usage). Maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data on which the scan statistic is undefined, e.g. no positives or no negatives.
// Maps to exit code 3.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition on a library call (bad index, bad rate, empty subset).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration value (restarts = 0, q <= 1, ...). Maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace subscan
