#pragma once

#include <stdexcept>
#include <string>

namespace gz {

enum class ErrorKind {
  DivergentMoment,
  OrderTooLarge,
  QuadratureFailure,
  NotPSD,
  AssumptionViolated,
  EmptySubset,
  GridTooLarge,
  SamplingUnsupported,
  NoConvergence,
  DegenerateCell,
  PreconditionFailed,
  LineCountOverflow,
  UnknownRow,
  InfeasibleCalibration,
  ConfigError,
  CertificateFalsified,
};

const char* to_string(ErrorKind k);

// Exit code used by the command line tool for each error kind.
int exit_code(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string detail = {})
      : std::runtime_error(what), kind_(kind), detail_(std::move(detail)) {}
  ErrorKind kind() const { return kind_; }
  // For PreconditionFailed this is the precondition name.
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg, std::string detail = {}) {
  throw Error(k, msg, std::move(detail));
}

[[noreturn]] inline void precondition_failed(const std::string& name, const std::string& msg) {
  throw Error(ErrorKind::PreconditionFailed, msg, name);
}

}  // namespace gz
