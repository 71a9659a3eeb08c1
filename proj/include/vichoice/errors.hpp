#pragma once

#include <stdexcept>
#include <string>

namespace vichoice {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a special function (digamma, gamma).
class DomainError : public Error {
 public:
  using Error::Error;
};

class OptimizerError : public Error {
 public:
  using Error::Error;
};

// Pooled MNL likelihood has no finite maximizer.
class SeparationError : public Error {
 public:
  using Error::Error;
};

// Invalid user-facing input; `field` names the offending setting.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace vichoice
