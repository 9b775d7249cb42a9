#pragma once

#include <stdexcept>
#include <string>

namespace symdepth {

// Bad file contents or schema problems (CLI exit code 3).
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller violated an operation precondition (CLI exit code 3).
class invalid_input : public std::runtime_error {
 public:
  explicit invalid_input(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure inside the optimizer (CLI exit code 4).
class solver_failure : public std::runtime_error {
 public:
  explicit solver_failure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace symdepth
