#pragma once

#include <stdexcept>
#include <string>

namespace dtsel {

enum class ErrorKind {
  // data validation
  WindowViolation,
  DimensionMismatch,
  NonFinite,
  TooFewObservations,
  Parse,
  ColumnMismatch,
  // numerical
  Degenerate,
  RankDeficient,
  EmptyPairSet,
  NoComparablePairs,
  GridDegenerate,
  DegenerateWeights,
  ReplicateFailure,
  CalibrationFailure,
  InvalidTruncationWindow,
  TooFewObserved,
  GridTooLarge,
  StudyAborted,
  NumericalFailure,
  // usage
  Config,
};

const char* to_string(ErrorKind kind);

/// Process exit code for an error kind: 1 usage/config, 2 data validation,
/// 3 numerical failure.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, long index = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Observation / line / row index the error refers to, or -1.
  long index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  long index_;
};

}  // namespace dtsel
