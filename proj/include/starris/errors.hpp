#pragma once

#include <stdexcept>
#include <string>

namespace starris {

// Invalid scenario, experiment or training configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (d <= 0, |cos| > 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Vector or matrix lengths that do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An action component outside its admissible range.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// API called in a state where the operation is undefined (empty batch,
// incomplete trace).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite loss, gradient or parameter during training.
class TrainingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace starris
