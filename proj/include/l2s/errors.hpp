#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace l2s {

// A caller broke an operation's precondition (bad action, empty allowed set, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid user configuration: unknown role, empty dataset, incompatible model.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file could not be loaded (bad magic, version, truncation).
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message, const std::string& source = {})
      : std::runtime_error((source.empty() ? "" : source + ":") + "line " + std::to_string(line) + ": " + message),
        line_(line),
        message_(message) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

}  // namespace l2s
