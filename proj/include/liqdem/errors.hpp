#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace liqdem {

// Base class for all library errors. code() is a stable machine-readable
// identifier; what() carries the human-readable detail.
class error : public std::runtime_error {
public:
  error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

class unknown_agent : public error {
public:
  explicit unknown_agent(const std::string& message) : error("unknown-agent", message) {}
};

class duplicate_delegator : public error {
public:
  explicit duplicate_delegator(const std::string& message)
      : error("duplicate-delegator", message) {}
};

class unknown_issue : public error {
public:
  explicit unknown_issue(const std::string& message) : error("unknown-issue", message) {}
};

class invalid_probability : public error {
public:
  explicit invalid_probability(const std::string& message)
      : error("invalid-probability", message) {}
};

// Iterative solver ran out of iterations, typically because a cycle of
// never-voting agents keeps the chain periodic.
class no_convergence : public error {
public:
  explicit no_convergence(const std::string& message) : error("no-convergence", message) {}
};

// A resource guard rejected the request (state space too big to enumerate).
class too_large : public error {
public:
  explicit too_large(const std::string& message) : error("too-large", message) {}
};

// Malformed input text; line/column locate the defect (1-based).
class parse_error : public error {
public:
  parse_error(const std::string& message, std::size_t line, std::size_t column)
      : error("parse-error", message), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

// Well-formed input that violates a documented constraint. The code names the
// violated rule, e.g. "duplicate-scope" or "probability-out-of-range".
class validation_error : public error {
public:
  validation_error(std::string code, const std::string& message)
      : error(std::move(code), message) {}
};

}  // namespace liqdem
