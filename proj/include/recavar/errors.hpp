#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recavar {

// Malformed scenario file, level-function literal or similar text input.
// `line` is 1-based; 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The simplex gave up (iteration limit or residual check failed after a
// claimed optimum). Never returned as a status: a wrong "optimal" is worse.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace recavar
