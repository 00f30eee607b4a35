#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtsel/error.hpp"

namespace dtsel {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One observed record: the response fell strictly inside (l, r).
struct Observation {
  double y = 0.0;
  double l = 0.0;
  double r = 0.0;
  Vector x;
};

/// Immutable, validated sample. Stored column-wise so the pair loops run over
/// contiguous memory.
class Dataset {
 public:
  Dataset() = default;

  /// Checks every record and builds the dataset. Throws Error with
  /// WindowViolation, DimensionMismatch or NonFinite carrying the record index.
  static Dataset validate(const std::vector<Observation>& records, Index p);
  static Dataset validate(const Vector& y, const Vector& l, const Vector& r,
                          const Matrix& x);

  Index size() const noexcept { return y_.size(); }
  Index dim() const noexcept { return x_.cols(); }

  const Vector& y() const noexcept { return y_; }
  const Vector& l() const noexcept { return l_; }
  const Vector& r() const noexcept { return r_; }
  const Matrix& x() const noexcept { return x_; }

  Observation observation(Index i) const;

  Dataset rows(std::span<const Index> idx) const;
  Dataset columns(std::span<const Index> cols) const;
  /// Adds c to every y, l and r.
  Dataset shifted(double c) const;

 private:
  Vector y_, l_, r_;
  Matrix x_;
};

/// Throws TooFewObservations unless the dataset has at least one pair.
void require_pairs(const Dataset& data);

double residual(const Observation& obs, const Vector& beta);
Vector residuals(const Dataset& data, const Vector& beta);

enum class StopReason { PairSetFixedPoint, CoefficientTolerance, Cycle, MaxIterations, LineSearch };
const char* to_string(StopReason reason);

struct FitResult {
  Vector beta;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  StopReason stop = StopReason::MaxIterations;
  std::vector<Index> active_set;
};

/// Indices j with beta_j != 0.
std::vector<Index> support_of(const Vector& beta);

/// Sets |beta_j| < zero_tol * max(1, ||beta||_inf) to exactly zero.
void threshold_zeros(Vector& beta, double zero_tol);

}  // namespace dtsel
