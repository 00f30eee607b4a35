#pragma once

#include <cstdint>
#include <vector>

#include "dtsel/rng.hpp"
#include "dtsel/tuning.hpp"

namespace dtsel {

/// Multiplier law W = atom * Bernoulli(prob). The default (2.5, 0.2) has mean
/// 0.5, variance 1 and support {0, 2.5}.
struct PerturbationLaw {
  double atom = 2.5;
  double prob = 0.2;

  double mean() const { return atom * prob; }
  double variance() const { return atom * atom * prob * (1.0 - prob); }
  double bound() const { return atom; }
};

Vector draw_weights(Index n, Rng& rng, const PerturbationLaw& law = {});

/// Minimiser of sum (W_i + W_j) h_ij + lambda sum w_j |beta_j| by the same
/// fixed-indicator iteration as fit_adaptive_lasso, from the same start. With
/// W = 0.5 every pair weight is exactly 1 and the result equals the unperturbed
/// fit bit for bit. Throws DegenerateWeights when all pair weights vanish.
Vector perturbed_fit(const Dataset& data, const Vector& W, double lambda_hat,
                     const AdaptiveWeights& weights, const Vector& start,
                     const EstimatorOptions& opts = {});

struct SeOptions {
  int replicates = 500;
  std::uint64_t seed = 1;
  int workers = 1;
  PerturbationLaw law;
  double max_failure_fraction = 0.05;
};

struct SeEstimate {
  std::vector<Index> active;  // frozen at the unperturbed selection
  Vector se;                  // sample standard deviation per active coefficient
  Vector se_mad;              // 1.4826 * MAD per active coefficient
  Matrix replicates;          // successful replicates x active
  int failed = 0;
};

/// Random-weighting standard errors for the active coefficients of
/// `selection`. Replicate k draws W from make_stream(seed, k). Failed
/// replicates are dropped and counted; more than max_failure_fraction is an
/// error.
SeEstimate estimate_se(const Dataset& data, const SelectionResult& selection,
                       const AdaptiveWeights& weights, const Vector& start,
                       const SeOptions& se_opts = {}, const EstimatorOptions& opts = {});

}  // namespace dtsel
