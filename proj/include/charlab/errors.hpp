#pragma once

#include <stdexcept>
#include <string>

namespace charlab {

// Failure taxonomy shared by every stage. The CLI maps these onto exit codes.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AmbiguityFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConsistencyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncompleteInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace charlab
