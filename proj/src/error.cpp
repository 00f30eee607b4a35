#include "dtsel/error.hpp"

namespace dtsel {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::WindowViolation: return "WindowViolation";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::ColumnMismatch: return "ColumnMismatch";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::EmptyPairSet: return "EmptyPairSet";
    case ErrorKind::NoComparablePairs: return "NoComparablePairs";
    case ErrorKind::GridDegenerate: return "GridDegenerate";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::ReplicateFailure: return "ReplicateFailure";
    case ErrorKind::CalibrationFailure: return "CalibrationFailure";
    case ErrorKind::InvalidTruncationWindow: return "InvalidTruncationWindow";
    case ErrorKind::TooFewObserved: return "TooFewObserved";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::StudyAborted: return "StudyAborted";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::WindowViolation:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonFinite:
    case ErrorKind::TooFewObservations:
    case ErrorKind::Parse:
    case ErrorKind::ColumnMismatch:
      return 2;
    default:
      return 3;
  }
}

}  // namespace dtsel
