#pragma once

#include "dtsel/rank_estimator.hpp"

namespace dtsel {

struct AdaptiveWeights {
  Vector w;
  double gamma = 1.0;
  double cap = 1e8;
};

/// w_j = min(|beta_j|^-gamma, cap).
AdaptiveWeights adaptive_weights(const Vector& beta_init, double gamma = 1.0, double cap = 1e8);

/// Appends the p penalty rows (response 0, design lambda w_j e_j).
LinearSystem augment_system(const LinearSystem& diff, double lambda, const AdaptiveWeights& weights);

/// Adaptive-LASSO rank estimator at a fixed lambda, iterated from `start`
/// (normally the unpenalised estimate). Coefficients below the zero threshold
/// are set to exactly zero; objective = loss + lambda sum w_j |beta_j|.
FitResult fit_adaptive_lasso(const Dataset& data, double lambda, const AdaptiveWeights& weights,
                             const Vector& start, const EstimatorOptions& opts = {});

}  // namespace dtsel
