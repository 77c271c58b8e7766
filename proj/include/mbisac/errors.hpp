#pragma once

#include <stdexcept>
#include <string>

namespace mbisac {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a least-squares Gram matrix is rank deficient. No regularization is attempted.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the two ISAC beams cancel so the combined precoder cannot be normalized.
class DegenerateCombination : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationUnderpowered : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mbisac
