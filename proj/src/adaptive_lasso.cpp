#include "dtsel/adaptive_lasso.hpp"

#include <cmath>

namespace dtsel {

AdaptiveWeights adaptive_weights(const Vector& beta_init, double gamma, double cap) {
  if (!beta_init.allFinite()) throw Error(ErrorKind::NonFinite, "initial estimate must be finite");
  if (!(gamma > 0.0) || !(cap > 0.0)) throw Error(ErrorKind::Config, "gamma and cap must be positive");
  AdaptiveWeights w{Vector(beta_init.size()), gamma, cap};
  for (Index j = 0; j < beta_init.size(); ++j) {
    const double a = std::abs(beta_init[j]);
    w.w[j] = a == 0.0 ? cap : std::min(std::pow(a, -gamma), cap);
  }
  return w;
}

LinearSystem augment_system(const LinearSystem& diff, double lambda, const AdaptiveWeights& weights) {
  const Index p = diff.cols();
  if (weights.w.size() != p) throw Error(ErrorKind::DimensionMismatch, "one adaptive weight per column");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::Config, "lambda must be non-negative");
  LinearSystem out;
  out.design.resize(diff.rows() + p, p);
  out.design.topRows(diff.rows()) = diff.design;
  out.design.bottomRows(p).setZero();
  for (Index j = 0; j < p; ++j) out.design(diff.rows() + j, j) = lambda * weights.w[j];
  out.response.resize(diff.rows() + p);
  out.response.head(diff.rows()) = diff.response;
  out.response.tail(p).setZero();
  if (diff.row_weights.size() != 0) {
    out.row_weights.resize(diff.rows() + p);
    out.row_weights.head(diff.rows()) = diff.row_weights;
    out.row_weights.tail(p).setOnes();
  }
  return out;
}

FitResult fit_adaptive_lasso(const Dataset& data, double lambda, const AdaptiveWeights& weights,
                             const Vector& start, const EstimatorOptions& opts) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::Config, "lambda must be finite and non-negative");
  const L1Penalty penalty{lambda, weights.w};
  return fixed_indicator_fit(data, start, &penalty, nullptr, opts);
}

}  // namespace dtsel
