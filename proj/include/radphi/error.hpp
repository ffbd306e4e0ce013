#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radphi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is a 0-based byte offset into the
/// source; end of input reports `text.size()`.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error("at position " + std::to_string(position) + ": " + what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Domain violation while evaluating an expression (ln of a non-positive
/// number, division by zero, missing binding, ...).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A growth model whose parameters or sampled behaviour violate O1-O4.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Iterative root finding did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid problem, grid or configuration input.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace radphi
