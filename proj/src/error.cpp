#include "gz/error.hpp"

namespace gz {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivergentMoment: return "DivergentMoment";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::EmptySubset: return "EmptySubset";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::SamplingUnsupported: return "SamplingUnsupported";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateCell: return "DegenerateCell";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::LineCountOverflow: return "LineCountOverflow";
    case ErrorKind::UnknownRow: return "UnknownRow";
    case ErrorKind::InfeasibleCalibration: return "InfeasibleCalibration";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::CertificateFalsified: return "CertificateFalsified";
  }
  return "Unknown";
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::UnknownRow:
    case ErrorKind::GridTooLarge:
    case ErrorKind::SamplingUnsupported:
      return 2;
    case ErrorKind::PreconditionFailed:
    case ErrorKind::AssumptionViolated:
    case ErrorKind::EmptySubset:
    case ErrorKind::LineCountOverflow:
      return 4;
    case ErrorKind::CertificateFalsified:
    case ErrorKind::InfeasibleCalibration:
      return 5;
    default:
      return 3;
  }
}

}  // namespace gz
