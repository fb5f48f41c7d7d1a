#pragma once

#include <stdexcept>
#include <string>

namespace tce {

/// A caller broke a documented precondition (shape mismatch, out-of-range label, bad parameter).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input data could not be read or parsed. The message names the offending field.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) {
    throw ContractViolation(message);
  }
}

}  // namespace tce
