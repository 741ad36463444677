#pragma once

#include <stdexcept>
#include <string>

namespace evtv {

// Invalid argument to one of the closed-form routines (strength < 1, rr < 1,
// nonpositive estimate, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for everything that can go wrong while fitting models to data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularDesign : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class PositivityViolation : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Fitted probability of a regime collapsed to 0 or 1 (separated outcome model).
class DegenerateEstimate : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class BootstrapFailure : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Malformed user input (CSV, JSON).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingColumn : public InputError {
 public:
  using InputError::InputError;
};

class NonBinaryValue : public InputError {
 public:
  NonBinaryValue(const std::string& what, std::size_t row) : InputError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class EmptyFile : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace evtv
