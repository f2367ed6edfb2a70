#pragma once

#include <stdexcept>
#include <string>

namespace fpl {

// Raised when an argument violates an operation's precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a file or config cannot be read.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace fpl
