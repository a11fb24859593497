#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace geoalign {

enum class ErrorKind {
  invalid_argument,   // bad sizes, nonpositive weights, malformed matrices
  dimension_mismatch, // operands with different ambient dimension
  parse,              // malformed input file
  infeasible,         // constraint violation in a supplied flow or input
  numeric,            // internal numerical failure (no convergence, overflow)
  io,                 // filesystem problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse failure with 1-based line/column, formatted "name:line:col: message".
class ParseError : public Error {
 public:
  ParseError(const std::string& name, long line, long column,
             const std::string& what)
      : Error(ErrorKind::parse, name + ":" + std::to_string(line) + ":" +
                                    std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  long line() const { return line_; }
  long column() const { return column_; }

 private:
  long line_;
  long column_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace geoalign
