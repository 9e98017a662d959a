#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace signet {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structural graph violation (self-loop, conflicting signs, empty result).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input dimensions disagree with a model or feature layout.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The eigensolver exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> residuals);

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace signet
