#pragma once

#include <string>
#include <vector>

#include "dtsel/adaptive_lasso.hpp"

namespace dtsel {

/// max(1, log log p); the floor keeps p <= 3 well defined.
double bic_multiplier(Index p);

/// loss(beta) + (log n / n) c_n |active set|.
double bic(const Dataset& data, const FitResult& fit, double c_n);

struct LambdaGrid {
  double lambda_max = 0.0;
  std::vector<double> values;  // descending, values.front() == lambda_max
};

/// Log-spaced grid on [1e-4 lambda_max, lambda_max]. lambda_max is the smallest
/// tested value in a halving/doubling search whose fit is identically zero.
/// Throws GridDegenerate when the unpenalised start is itself all zero.
LambdaGrid lambda_grid(const Dataset& data, const AdaptiveWeights& weights, const Vector& start,
                       int size = 50, const EstimatorOptions& opts = {});

struct TraceEntry {
  double lambda = 0.0;
  double bic = 0.0;
  Index df = 0;
  double loss = 0.0;
  bool excluded = false;
  std::string reason;
};

struct SelectionResult {
  double lambda_hat = 0.0;
  FitResult fit;
  std::vector<TraceEntry> trace;
};

/// Fits every grid value from `start` and keeps the BIC minimiser; ties go to
/// the larger lambda. A lambda whose fit throws is kept in the trace as
/// excluded.
SelectionResult select_lambda(const Dataset& data, const AdaptiveWeights& weights, const Vector& start,
                              const std::vector<double>& grid, const EstimatorOptions& opts = {});

}  // namespace dtsel
