#pragma once

#include <stdexcept>
#include <string>

namespace nimf {

enum class ErrorKind {
  invalid_input,
  unsupported_model,
  numerical_domain,
  search_failure,
  optimization_failure,
  invalid_state,
  bracketing,
  numerical,
  not_available,
  config,
  io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// log argument of a mean-field surface went non-positive
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace nimf
