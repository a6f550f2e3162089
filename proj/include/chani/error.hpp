#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chani {

// Rejected numeric input (non-finite gains, rates outside [0,1], size mismatch).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No candidate survived the selection phase; training cannot continue.
class SelectionEmpty : public std::runtime_error {
 public:
  SelectionEmpty(std::size_t depth, std::size_t candidates, double best_rate)
      : std::runtime_error("selection at depth " + std::to_string(depth) + " kept none of " +
                           std::to_string(candidates) + " candidates (best rate " +
                           std::to_string(best_rate) + ")"),
        depth_(depth) {}
  std::size_t depth() const noexcept { return depth_; }

 private:
  std::size_t depth_;
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chani
