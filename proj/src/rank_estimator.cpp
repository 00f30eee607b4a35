#include "dtsel/rank_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dtsel {
namespace {

// Difference rows for `pairs`, followed by `penalty` rows when given.
LinearSystem build_system(const Dataset& data, const PairSet& pairs, const Vector* W,
                          const L1Penalty* penalty) {
  const Index n = data.size();
  const Index p = data.dim();
  const auto rows = static_cast<Index>(pairs.size());
  const Index extra = penalty ? p : 0;
  const double s = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));

  LinearSystem sys;
  sys.design.resize(rows + extra, p);
  sys.response.resize(rows + extra);
  const Matrix& x = data.x();
  for (Index c = 0; c < p; ++c) {
    double* col = sys.design.col(c).data();
    for (Index m = 0; m < rows; ++m) {
      const auto& pr = pairs.pairs[static_cast<std::size_t>(m)];
      col[m] = (x(pr.i, c) - x(pr.j, c)) * s;
    }
  }
  for (Index m = 0; m < rows; ++m) {
    const auto& pr = pairs.pairs[static_cast<std::size_t>(m)];
    sys.response[m] = (data.y()[pr.i] - data.y()[pr.j]) * s;
  }
  if (penalty) {
    sys.design.bottomRows(p).setZero();
    sys.response.tail(p).setZero();
    for (Index j = 0; j < p; ++j) sys.design(rows + j, j) = penalty->lambda * penalty->weights[j];
  }
  if (W) {
    sys.row_weights.resize(rows + extra);
    for (Index m = 0; m < rows; ++m) {
      const auto& pr = pairs.pairs[static_cast<std::size_t>(m)];
      sys.row_weights[m] = (*W)[pr.i] + (*W)[pr.j];
    }
    if (extra) sys.row_weights.tail(extra).setOnes();
  }
  return sys;
}

double penalty_value(const L1Penalty* penalty, const Vector& beta) {
  if (!penalty) return 0.0;
  return penalty->lambda * penalty->weights.cwiseProduct(beta.cwiseAbs()).sum();
}

}  // namespace

LinearSystem build_difference_system(const Dataset& data, const PairSet& pairs, const Vector* W) {
  require_pairs(data);
  if (pairs.empty()) throw Error(ErrorKind::EmptyPairSet, "no pairs to build a difference system from");
  if (W && W->size() != data.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one perturbation weight per observation");
  }
  return build_system(data, pairs, W, nullptr);
}

Vector naive_lad(const Dataset& data, const LadOptions& opts) {
  LinearSystem sys;
  sys.design.resize(data.size(), data.dim() + 1);
  sys.design.col(0).setOnes();
  sys.design.rightCols(data.dim()) = data.x();
  // Centring at the median makes the slopes invariant to a shift of y.
  std::vector<double> ys(data.y().data(), data.y().data() + data.size());
  std::nth_element(ys.begin(), ys.begin() + static_cast<long>(ys.size() / 2), ys.end());
  sys.response = data.y().array() - ys[ys.size() / 2];
  LadOptions o = opts;
  o.warm_start.reset();
  return solve_lad(sys, o).beta.tail(data.dim());
}

namespace {

// All unordered pairs with their clamp bounds and weights, for line searches.
struct PairTable {
  std::vector<Index> i, j;
  std::vector<double> lower, upper, weight;

  PairTable(const Dataset& data, const Vector* W) {
    const Index n = data.size();
    const Vector below = data.l() - data.y();
    const Vector above = data.r() - data.y();
    for (Index a = 0; a < n; ++a) {
      for (Index b = a + 1; b < n; ++b) {
        const double w = W ? (*W)[a] + (*W)[b] : 1.0;
        if (w <= 0.0) continue;
        i.push_back(a);
        j.push_back(b);
        lower.push_back(std::max(below[b], -above[a]));
        upper.push_back(std::min(above[b], -below[a]));
        weight.push_back(w);
      }
    }
  }
};

// Minimises t -> sum w |clamp(e_i - e_j - t (x_ik - x_jk), lower, upper)| over
// the whole line. The function is piecewise linear with slope zero at both
// ends, so a sweep over the sorted breakpoints finds the global minimum.
// Returns the step and its decrease relative to t = 0 (0 when none).
std::pair<double, double> line_minimum(const PairTable& t, const Vector& e, const Matrix& x, Index k,
                                       std::vector<std::pair<double, double>>& knots) {
  knots.clear();
  for (std::size_t m = 0; m < t.i.size(); ++m) {
    const double a = x(t.i[m], k) - x(t.j[m], k);
    if (a == 0.0) continue;
    const double d = e[t.i[m]] - e[t.j[m]];
    const double w = t.weight[m] * std::abs(a);
    knots.emplace_back((d - t.upper[m]) / a, -w);
    knots.emplace_back(d / a, 2.0 * w);
    knots.emplace_back((d - t.lower[m]) / a, -w);
  }
  if (knots.empty()) return {0.0, 0.0};
  std::sort(knots.begin(), knots.end());

  double value = 0.0, slope = 0.0, prev = knots.front().first;
  double best_value = 0.0, best_t = prev;
  double at_zero = 0.0;
  bool zero_seen = prev >= 0.0;
  for (const auto& [pos, jump] : knots) {
    if (!zero_seen && pos >= 0.0) {
      at_zero = value + slope * (0.0 - prev);
      zero_seen = true;
    }
    value += slope * (pos - prev);
    prev = pos;
    slope += jump;
    if (value < best_value) {
      best_value = value;
      best_t = pos;
    }
  }
  if (!zero_seen) at_zero = value;
  return {best_t, at_zero - best_value};
}

}  // namespace

FitResult fixed_indicator_fit(const Dataset& data, const Vector& start, const L1Penalty* penalty,
                              const Vector* W, const EstimatorOptions& opts) {
  require_pairs(data);
  const Index p = data.dim();
  if (start.size() != p) throw Error(ErrorKind::DimensionMismatch, "start length must equal covariate dimension");
  if (penalty && penalty->weights.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "one penalty weight per coefficient");
  }
  if (W) {
    if (W->size() != data.size()) throw Error(ErrorKind::DimensionMismatch, "one perturbation weight per observation");
    if ((W->array() > 0.0).count() == 0) {
      throw Error(ErrorKind::DegenerateWeights, "every pair weight W_i + W_j is zero");
    }
  }
  if (opts.max_iter < 1) throw Error(ErrorKind::Config, "max_iter must be at least 1");

  auto objective = [&](const Vector& b) {
    return (W ? weighted_loss(data, b, *W) : loss(data, b)) + penalty_value(penalty, b);
  };

  // One run of the fixed-indicator iteration from `from`.
  auto iterate = [&](const Vector& from, FitResult& out) {
    Vector current = from;
    Vector best_beta = from;
    double best_objective = std::numeric_limits<double>::infinity();
    PairSet previous;
    std::vector<std::uint64_t> seen;
    int local = 0;
    out.converged = false;
    while (true) {
      PairSet pairs = comparable_pairs(data, current);
      if (pairs.empty()) throw Error(ErrorKind::NoComparablePairs, "no comparable pairs at the current iterate");
      if (local > 0 && pairs == previous) {
        out.stop = StopReason::PairSetFixedPoint;
        out.converged = true;
        break;
      }
      const auto h = pairs.hash();
      if (std::find(seen.begin(), seen.end(), h) != seen.end()) {
        out.stop = StopReason::Cycle;
        break;
      }
      if (local >= opts.max_iter) {
        out.stop = StopReason::MaxIterations;
        break;
      }
      seen.push_back(h);

      LadOptions lad = opts.lad;
      lad.warm_start = current;
      Vector next = solve_lad(build_system(data, pairs, W, penalty), lad).beta;
      ++local;
      ++out.iterations;

      const double f = objective(next);
      if (f < best_objective) {
        best_objective = f;
        best_beta = next;
      }
      const double step = (next - current).cwiseAbs().maxCoeff();
      current = std::move(next);
      previous = std::move(pairs);
      if (step < opts.tol) {
        out.stop = StopReason::CoefficientTolerance;
        out.converged = true;
        break;
      }
    }
    out.beta = out.converged ? current : best_beta;
    out.objective = objective(out.beta);
  };

  FitResult out;
  iterate(start, out);

  if (opts.line_search && (!penalty || penalty->lambda == 0.0)) {
    const PairTable table(data, W);
    std::vector<std::pair<double, double>> knots;
    for (int round = 0; round < opts.max_line_search_rounds; ++round) {
      Vector b = out.beta;
      double f = out.objective;
      bool moved = false;
      for (Index k = 0; k < p; ++k) {
        const auto [step, gain] = line_minimum(table, residuals(data, b), data.x(), k, knots);
        if (!(gain > 0.0) || step == 0.0) continue;
        Vector trial = b;
        trial[k] += step;
        const double g = objective(trial);
        if (g < f - 1e-12 * std::abs(f)) {
          b = std::move(trial);
          f = g;
          moved = true;
        }
      }
      if (!moved) break;
      FitResult again;
      again.iterations = out.iterations;
      iterate(b, again);
      if (again.objective < f) {
        out = std::move(again);
      } else {
        out.beta = b;
        out.objective = f;
        out.iterations = again.iterations;
        out.stop = StopReason::LineSearch;
        out.converged = true;
      }
    }
  }

  if (penalty && penalty->lambda > 0.0) {
    threshold_zeros(out.beta, opts.zero_tol);
    out.objective = objective(out.beta);
  }
  out.active_set = support_of(out.beta);
  return out;
}

FitResult fit_unpenalized(const Dataset& data, const EstimatorOptions& opts) {
  require_pairs(data);
  return fixed_indicator_fit(data, naive_lad(data, opts.lad), nullptr, nullptr, opts);
}

}  // namespace dtsel
