#pragma once

#include <stdexcept>
#include <string>

namespace jetgeom {

/// Base of all library errors. `exit_code()` is the CLI status the error maps to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

class ChartMismatch : public Error {
 public:
  using Error::Error;
};

class NotInvertible : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

/// A jet ran out of valid order (a derivative of an order-0 jet, or a
/// downstream request deeper than the available truncation).
class OrderExhausted : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

/// The constant-term matrix of a jet linear system is singular at the point.
class SingularLeadingMatrix : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }
  int exit_code() const override { return 2; }

 private:
  int line_;
  int column_;
};

/// Problem-file schema violations (missing keys, index out of range, ...).
class SpecError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

class EvaluationError : public Error {
 public:
  enum class Kind { division_at_pole, function_needs_float_mode, unbound_variable, decimal_in_rational_mode, degenerate_field };
  EvaluationError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }
  int exit_code() const override { return kind_ == Kind::degenerate_field ? 3 : 2; }

 private:
  Kind kind_;
};

class RegularityFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

/// Canonical-frame construction requested outside k > 2 or (k = 2 and m > 1).
class GatingViolation : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 5; }
};

}  // namespace jetgeom
