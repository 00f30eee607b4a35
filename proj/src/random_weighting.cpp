#include "dtsel/random_weighting.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dtsel/parallel.hpp"

namespace dtsel {
namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  }
  return m;
}

}  // namespace

Vector draw_weights(Index n, Rng& rng, const PerturbationLaw& law) {
  std::bernoulli_distribution coin(law.prob);
  Vector W(n);
  for (Index i = 0; i < n; ++i) W[i] = coin(rng) ? law.atom : 0.0;
  return W;
}

Vector perturbed_fit(const Dataset& data, const Vector& W, double lambda_hat, const AdaptiveWeights& weights,
                     const Vector& start, const EstimatorOptions& opts) {
  if (W.size() != data.size()) throw Error(ErrorKind::DimensionMismatch, "one perturbation weight per observation");
  const L1Penalty penalty{lambda_hat, weights.w};
  return fixed_indicator_fit(data, start, &penalty, &W, opts).beta;
}

SeEstimate estimate_se(const Dataset& data, const SelectionResult& selection, const AdaptiveWeights& weights,
                       const Vector& start, const SeOptions& se_opts, const EstimatorOptions& opts) {
  if (se_opts.replicates < 1) throw Error(ErrorKind::Config, "need at least one replicate");
  SeEstimate out;
  out.active = selection.fit.active_set;
  const auto k = static_cast<Index>(out.active.size());

  std::vector<std::optional<Vector>> draws(static_cast<std::size_t>(se_opts.replicates));
  parallel_for(se_opts.replicates, se_opts.workers, [&](long b) {
    Rng rng = make_stream(se_opts.seed, static_cast<std::uint64_t>(b));
    const Vector W = draw_weights(data.size(), rng, se_opts.law);
    try {
      const Vector beta = perturbed_fit(data, W, selection.lambda_hat, weights, start, opts);
      Vector kept(k);
      for (Index a = 0; a < k; ++a) kept[a] = beta[out.active[static_cast<std::size_t>(a)]];
      draws[static_cast<std::size_t>(b)] = std::move(kept);
    } catch (const Error&) {
      // counted below
    }
  });

  std::vector<Vector> ok;
  for (auto& d : draws) {
    if (d) ok.push_back(std::move(*d));
    else ++out.failed;
  }
  if (out.failed > se_opts.max_failure_fraction * se_opts.replicates) {
    throw Error(ErrorKind::ReplicateFailure, std::to_string(out.failed) + " of " +
                                                 std::to_string(se_opts.replicates) +
                                                 " random-weighting replicates failed");
  }

  const auto b = static_cast<Index>(ok.size());
  out.replicates.resize(b, k);
  for (Index r = 0; r < b; ++r) out.replicates.row(r) = ok[static_cast<std::size_t>(r)].transpose();
  out.se = Vector::Zero(k);
  out.se_mad = Vector::Zero(k);
  if (b < 2) return out;
  for (Index a = 0; a < k; ++a) {
    const auto col = out.replicates.col(a);
    std::vector<double> v(col.data(), col.data() + b);
    const double med = median_of(v);
    // deviations from the median keep identical replicates at exactly zero spread
    const Eigen::ArrayXd dev = col.array() - med;
    out.se[a] = std::sqrt((dev - dev.mean()).square().sum() / static_cast<double>(b - 1));
    for (auto& x : v) x = std::abs(x - med);
    out.se_mad[a] = 1.4826 * median_of(v);
  }
  return out;
}

}  // namespace dtsel
