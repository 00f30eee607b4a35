#pragma once

#include "dtsel/lad.hpp"
#include "dtsel/pairwise.hpp"

namespace dtsel {

struct EstimatorOptions {
  double tol = 1e-6;       // sup-norm step that counts as converged
  int max_iter = 50;
  double zero_tol = 1e-6;  // relative threshold for exact zeros (penalised fits)
  /// Unpenalised fits: after the iteration stops, exact line searches of the
  /// loss along each coordinate, restarting the iteration from any improvement.
  bool line_search = true;
  int max_line_search_rounds = 20;
  LadOptions lad;
};

/// One row per unordered pair: response (Y_i - Y_j) s, design (x_i - x_j) s
/// with s = 2 / (n(n-1)). When `obs_weights` is given, row (i, j) carries
/// weight W_i + W_j.
LinearSystem build_difference_system(const Dataset& data, const PairSet& pairs,
                                     const Vector* obs_weights = nullptr);

/// Slopes of an L1 fit of y on (1, x), ignoring truncation.
Vector naive_lad(const Dataset& data, const LadOptions& opts = {});

/// Penalty lambda * sum_j w_j |beta_j|.
struct L1Penalty {
  double lambda = 0.0;
  Vector weights;
};

/// Fixed-indicator iteration: freeze the comparable pairs at the current
/// iterate, solve the (optionally penalised, optionally pair-weighted) LAD
/// problem, repeat.
///
/// Stops when the comparable set repeats the previous one (the iterate is then
/// the exact minimiser for its own set), when the step falls below opts.tol, on
/// a revisited pair set, or after opts.max_iter solves. The first two are
/// reported as converged and return the last iterate; the others return the
/// iterate with the smallest objective seen.
///
/// The loss is not convex, so a fixed point can be a local minimum only. Without
/// a penalty (or with lambda = 0) and with opts.line_search set, the result is
/// refined by exact global line searches along each coordinate; the iteration
/// restarts from any point that lowers the objective. A result that the
/// iteration could not improve on is reported with StopReason::LineSearch.
FitResult fixed_indicator_fit(const Dataset& data, const Vector& start,
                              const L1Penalty* penalty, const Vector* obs_weights,
                              const EstimatorOptions& opts);

/// Unpenalised rank estimator, started from naive_lad().
FitResult fit_unpenalized(const Dataset& data, const EstimatorOptions& opts = {});

}  // namespace dtsel
