#include "nimf/errors.hpp"

#include <sstream>

namespace nimf {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::unsupported_model: return "unsupported-model";
    case ErrorKind::numerical_domain: return "numerical-domain";
    case ErrorKind::search_failure: return "search-failure";
    case ErrorKind::optimization_failure: return "optimization-failure";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::bracketing: return "bracketing";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::not_available: return "not-available";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {
std::string with_value(const std::string& what, double v) {
  std::ostringstream os;
  os.precision(17);
  os << what << " (value " << v << ")";
  return os.str();
}
}  // namespace

DomainError::DomainError(const std::string& what, double value)
    : Error(ErrorKind::numerical_domain, with_value(what, value)), value_(value) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace nimf
