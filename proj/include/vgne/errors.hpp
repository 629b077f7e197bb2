#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vgne {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches and malformed structures.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// An oracle or iterate produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Step sizes, relaxation or SPD checks failed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InexactnessError : public Error {
 public:
  InexactnessError(const std::string& what, double achieved_bound)
      : Error(what), achieved_bound_(achieved_bound) {}
  double achieved_bound() const noexcept { return achieved_bound_; }

 private:
  double achieved_bound_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t last_finite_iteration)
      : Error(what), last_finite_iteration_(last_finite_iteration) {}
  std::size_t last_finite_iteration() const noexcept { return last_finite_iteration_; }

 private:
  std::size_t last_finite_iteration_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vgne
