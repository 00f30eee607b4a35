#include "dtsel/tuning.hpp"

#include <algorithm>
#include <cmath>

namespace dtsel {

double bic_multiplier(Index p) {
  if (p < 3) return 1.0;
  return std::max(1.0, std::log(std::log(static_cast<double>(p))));
}

double bic(const Dataset& data, const FitResult& fit, double c_n) {
  const double n = static_cast<double>(data.size());
  return loss(data, fit.beta) + std::log(n) / n * c_n * static_cast<double>(fit.active_set.size());
}

LambdaGrid lambda_grid(const Dataset& data, const AdaptiveWeights& weights, const Vector& start,
                       int size, const EstimatorOptions& opts) {
  if (size < 1) throw Error(ErrorKind::Config, "grid size must be at least 1");
  if (start.size() != data.dim()) throw Error(ErrorKind::DimensionMismatch, "start length must equal covariate dimension");
  if ((start.array() != 0.0).count() == 0) {
    throw Error(ErrorKind::GridDegenerate, "the unpenalised fit is already all zero");
  }

  // Subgradient bound at beta = 0 for the pairs comparable there.
  double guess = 0.0;
  const PairSet at_zero = comparable_pairs(data, Vector::Zero(data.dim()));
  if (!at_zero.empty()) {
    const LinearSystem sys = build_difference_system(data, at_zero);
    const Vector g = sys.design.transpose() * sys.response.unaryExpr([](double v) {
      return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    });
    for (Index j = 0; j < g.size(); ++j) guess = std::max(guess, std::abs(g[j]) / weights.w[j]);
  }
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0;

  auto all_zero = [&](double lambda) {
    return fit_adaptive_lasso(data, lambda, weights, start, opts).active_set.empty();
  };

  double lambda_max = guess;
  if (all_zero(guess)) {
    for (int k = 0; k < 60 && all_zero(lambda_max / 2.0); ++k) lambda_max /= 2.0;
  } else {
    bool found = false;
    for (int k = 0; k < 60 && !found; ++k) {
      lambda_max *= 2.0;
      found = all_zero(lambda_max);
    }
    if (!found) throw Error(ErrorKind::GridDegenerate, "no tested lambda produced an all-zero fit");
  }

  LambdaGrid grid;
  grid.lambda_max = lambda_max;
  if (size == 1) {
    grid.values.push_back(lambda_max);
    return grid;
  }
  for (int k = 0; k < size; ++k) {
    grid.values.push_back(lambda_max * std::pow(10.0, -4.0 * k / (size - 1)));
  }
  grid.values.front() = lambda_max;
  return grid;
}

SelectionResult select_lambda(const Dataset& data, const AdaptiveWeights& weights, const Vector& start,
                              const std::vector<double>& grid, const EstimatorOptions& opts) {
  if (grid.empty()) throw Error(ErrorKind::Config, "lambda grid is empty");
  const double c_n = bic_multiplier(data.dim());
  SelectionResult out;
  bool have = false;
  double best = 0.0;
  for (double lambda : grid) {
    TraceEntry entry;
    entry.lambda = lambda;
    try {
      FitResult fit = fit_adaptive_lasso(data, lambda, weights, start, opts);
      entry.loss = loss(data, fit.beta);
      entry.df = static_cast<Index>(fit.active_set.size());
      entry.bic = bic(data, fit, c_n);
      if (!have || entry.bic < best || (entry.bic == best && lambda > out.lambda_hat)) {
        have = true;
        best = entry.bic;
        out.lambda_hat = lambda;
        out.fit = std::move(fit);
      }
    } catch (const Error& e) {
      entry.excluded = true;
      entry.reason = e.what();
    }
    out.trace.push_back(std::move(entry));
  }
  if (!have) throw Error(ErrorKind::NumericalFailure, "every lambda on the grid failed: " + out.trace.front().reason);
  return out;
}

}  // namespace dtsel
