#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hoqmc {

// Malformed or out-of-contract input. The CLI maps this to exit code 1.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A size guard (dual enumeration, point count, combination count) was hit.
// The CLI maps this to exit code 2.
class GuardExceeded : public std::runtime_error {
 public:
  GuardExceeded(const std::string& what, long double required, long double limit)
      : std::runtime_error(what + " (required " + std::to_string(static_cast<double>(required)) +
                           ", limit " + std::to_string(static_cast<double>(limit)) + ")"),
        required_(required),
        limit_(limit) {}

  long double required() const noexcept { return required_; }
  long double limit() const noexcept { return limit_; }

 private:
  long double required_;
  long double limit_;
};

}  // namespace hoqmc
