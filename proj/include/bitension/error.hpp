#pragma once

#include <stdexcept>
#include <string>

namespace bitension {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jet composition left the domain of an elementary function
/// (sqrt of a non-positive value, reciprocal of zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in a chart expression. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Invalid chart document, catalog parameters, or evaluation point.
class ChartError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure while building the extrinsic package at a point
/// (rank deficiency, ill-conditioned metric, degenerate normal complement).
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace bitension
