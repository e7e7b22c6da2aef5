#pragma once

#include <stdexcept>
#include <string>

namespace copmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function or distribution parameter.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Matrix failed a structural requirement (symmetry, positive definiteness).
class MatrixError : public Error {
 public:
  using Error::Error;
};

/// Data cannot support the requested statistic (too few rows, constant column).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment, model or simulation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries the 1-based row and column when known
/// (0 means "not applicable").
class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t row = 0, std::size_t column = 0)
      : Error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string &what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row > 0) out += " (row " + std::to_string(row);
    if (row > 0 && column > 0) out += ", column " + std::to_string(column);
    if (row > 0) out += ")";
    return out;
  }

  std::size_t row_;
  std::size_t column_;
};

}  // namespace copmix
