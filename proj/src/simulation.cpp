#include "dtsel/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dtsel/parallel.hpp"

namespace dtsel {
namespace {

constexpr double kStudyCoefficients[] = {3.12, 2.20, -0.86, 0.92, -2.49, 1.95, -1.32, -2.13};

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  return m;
}

// Covariates, responses and the uniform variate that places L in its range.
struct CoreDraws {
  Matrix x;
  Vector y;
  Vector u;
};

CoreDraws draw_core(const ScenarioSpec& spec, Rng& rng, Index count) {
  const Index p = spec.dim();
  if (static_cast<Index>(spec.covariates.size()) != p) {
    throw Error(ErrorKind::Config, "one covariate law per coefficient");
  }
  std::vector<Index> gauss;
  for (Index j = 0; j < p; ++j) {
    if (spec.covariates[static_cast<std::size_t>(j)].kind == CovariateLaw::Kind::Gaussian) gauss.push_back(j);
  }
  const auto g = static_cast<Index>(gauss.size());
  Matrix corr(g, g);
  for (Index a = 0; a < g; ++a) {
    for (Index b = 0; b < g; ++b) {
      corr(a, b) = std::pow(spec.gaussian_rho, static_cast<double>(std::abs(gauss[a] - gauss[b])));
    }
  }
  const Matrix chol = corr.llt().matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CoreDraws out{Matrix(count, p), Vector(count), Vector(count)};
  Vector z(g);
  for (Index i = 0; i < count; ++i) {
    for (Index j = 0; j < p; ++j) {
      const auto& law = spec.covariates[static_cast<std::size_t>(j)];
      switch (law.kind) {
        case CovariateLaw::Kind::Bernoulli: out.x(i, j) = unit(rng) < law.a ? 1.0 : 0.0; break;
        case CovariateLaw::Kind::Uniform: out.x(i, j) = law.a + (law.b - law.a) * unit(rng); break;
        case CovariateLaw::Kind::Gaussian: break;
      }
    }
    for (Index a = 0; a < g; ++a) z[a] = normal(rng);
    const Vector zc = chol * z;
    for (Index a = 0; a < g; ++a) out.x(i, gauss[a]) = zc[a];

    double eps = 0.0;
    if (spec.error == ErrorLaw::Normal) {
      eps = normal(rng);
    } else {
      double v = 0.0;
      while (v == 0.0) v = unit(rng);
      eps = std::log(-std::log(v));  // 1 - exp(-exp(x)) CDF
    }
    out.y[i] = out.x.row(i).dot(spec.beta0) + eps;
    out.u[i] = unit(rng);
  }
  return out;
}

void require_calibrated(const ScenarioSpec& spec) {
  if (!spec.calibrated) throw Error(ErrorKind::Config, "scenario truncation window is not calibrated");
}

}  // namespace

ErrorLaw parse_error_law(const std::string& name) {
  if (name == "normal") return ErrorLaw::Normal;
  if (name == "ev" || name == "extreme_min" || name == "min_extreme_value") return ErrorLaw::MinExtremeValue;
  throw Error(ErrorKind::Config, "error_law: unknown law '" + name + "' (expected normal or ev)");
}

const char* to_string(ErrorLaw law) { return law == ErrorLaw::Normal ? "normal" : "ev"; }

std::vector<Index> ScenarioSpec::support() const { return support_of(beta0); }

Index scenario_dimension(int n_tilde) {
  return static_cast<Index>(std::floor(7.0 * std::pow(static_cast<double>(n_tilde), 0.2)));
}

ScenarioSpec study_scenario(int n_tilde, ErrorLaw error, double truncation_target) {
  ScenarioSpec s;
  s.n_tilde = n_tilde;
  s.error = error;
  s.truncation_target = truncation_target;
  const Index p = scenario_dimension(n_tilde);
  const Index p1 = p / 3;
  if (p1 < 1 || p < p1 + 3) throw Error(ErrorKind::Config, "n_tilde too small for the study layout");
  s.beta0 = Vector::Zero(p);
  for (Index j = 0; j < p1; ++j) s.beta0[j] = kStudyCoefficients[j % 8];
  s.covariates.assign(static_cast<std::size_t>(p), CovariateLaw{});
  using K = CovariateLaw::Kind;
  s.covariates[0] = {K::Bernoulli, 0.25, 0.0};
  s.covariates[1] = {K::Bernoulli, 0.8, 0.0};
  s.covariates[static_cast<std::size_t>(p1)] = {K::Uniform, 0.0, 2.0};
  s.covariates[static_cast<std::size_t>(p1 + 1)] = {K::Bernoulli, 0.5, 0.0};
  s.covariates[static_cast<std::size_t>(p1 + 2)] = {K::Uniform, -2.0, 0.0};
  s.b_vec = 0.1 * s.beta0.cwiseAbs();
  return s;
}

ScenarioSpec gaussian_scenario(int n_tilde, const Vector& beta0, ErrorLaw error, double truncation_target) {
  ScenarioSpec s;
  s.n_tilde = n_tilde;
  s.beta0 = beta0;
  s.error = error;
  s.truncation_target = truncation_target;
  s.covariates.assign(static_cast<std::size_t>(beta0.size()), CovariateLaw{});
  s.b_vec = 0.1 * beta0.cwiseAbs();
  return s;
}

FullSample generate_full_sample(const ScenarioSpec& spec, Rng& rng, Index count) {
  require_calibrated(spec);
  CoreDraws core = draw_core(spec, rng, count);
  FullSample out{std::move(core.x), std::move(core.y), Vector(count), Vector(count)};
  for (Index i = 0; i < count; ++i) {
    const double width = spec.spread + out.x.row(i).dot(spec.b_vec) - spec.b_floor;
    if (!(width > 0.0)) {
      throw Error(ErrorKind::InvalidTruncationWindow, "left truncation support is empty for a sampled covariate",
                  static_cast<long>(i));
    }
    out.l[i] = spec.a_const + core.u[i] * width;
    out.r[i] = out.l[i] + spec.c_const;
  }
  return out;
}

FullSample generate_full_sample(const ScenarioSpec& spec, Rng& rng) {
  return generate_full_sample(spec, rng, spec.n_tilde);
}

Dataset apply_truncation(const FullSample& s) {
  std::vector<Index> keep;
  for (Index i = 0; i < s.y.size(); ++i) {
    if (s.l[i] < s.y[i] && s.y[i] < s.r[i]) keep.push_back(i);
  }
  const auto n = static_cast<Index>(keep.size());
  if (n < s.x.cols() + 2) {
    throw Error(ErrorKind::TooFewObserved, std::to_string(n) + " observed records for " +
                                               std::to_string(s.x.cols()) + " covariates");
  }
  Vector y(n), l(n), r(n);
  Matrix x(n, s.x.cols());
  for (Index k = 0; k < n; ++k) {
    const Index i = keep[static_cast<std::size_t>(k)];
    y[k] = s.y[i];
    l[k] = s.l[i];
    r[k] = s.r[i];
    x.row(k) = s.x.row(i);
  }
  return Dataset::validate(y, l, r, x);
}

Dataset generate_observed(const ScenarioSpec& spec, Rng& rng, Index n) {
  std::vector<Observation> kept;
  while (static_cast<Index>(kept.size()) < n) {
    const FullSample one = generate_full_sample(spec, rng, 1);
    if (one.l[0] < one.y[0] && one.y[0] < one.r[0]) {
      kept.push_back({one.y[0], one.l[0], one.r[0], one.x.row(0).transpose()});
    }
  }
  return Dataset::validate(kept, spec.dim());
}

Calibration calibrate_truncation(ScenarioSpec& spec, double target, Rng& rng, Index pilot_size) {
  if (!(target >= 0.05) || !(target < 0.9)) {
    throw Error(ErrorKind::Config, "truncation_target must lie in [0.05, 0.9)");
  }
  if (spec.b_vec.size() != spec.dim()) spec.b_vec = 0.1 * spec.beta0.cwiseAbs();
  const CoreDraws pilot = draw_core(spec, rng, pilot_size);
  const auto count = static_cast<double>(pilot_size);

  const Vector bx = pilot.x * spec.b_vec;
  const double bx_mean = bx.mean();
  const double bx_sd = std::sqrt((bx.array() - bx_mean).square().sum() / count);
  const double y_mean = pilot.y.mean();
  const double y_sd = std::sqrt((pilot.y.array() - y_mean).square().sum() / count);
  spec.b_floor = bx_mean - (bx_sd > 0.0 ? 8.0 * bx_sd : 1.0);
  spec.spread = y_sd > 0.0 ? 2.0 * y_sd : 1.0;
  spec.truncation_target = target;
  const double half = target / 2.0;

  // Left: y <= a + u * span, increasing in a.
  Vector left_key(pilot_size);
  for (Index i = 0; i < pilot_size; ++i) {
    left_key[i] = pilot.y[i] - pilot.u[i] * (spec.spread + bx[i] - spec.b_floor);
  }
  auto left_rate = [&](double a) { return (left_key.array() <= a).cast<double>().sum() / count; };
  double lo = left_key.minCoeff() - 1.0, hi = left_key.maxCoeff() + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (left_rate(mid) < half ? lo : hi) = mid;
  }
  const double a = hi;

  // Right: y >= L + c, decreasing in c.
  Vector right_key(pilot_size);
  for (Index i = 0; i < pilot_size; ++i) right_key[i] = pilot.y[i] - (a + (pilot.y[i] - left_key[i]));
  auto right_rate = [&](double c) { return (right_key.array() >= c).cast<double>().sum() / count; };
  lo = 0.0;
  hi = std::max(right_key.maxCoeff(), 0.0) + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (right_rate(mid) > half ? lo : hi) = mid;
  }
  const double c = hi;

  Calibration cal{a, c, left_rate(a), right_rate(c)};
  if (std::abs(cal.left_rate - half) > 0.005 || std::abs(cal.right_rate - half) > 0.005) {
    throw Error(ErrorKind::CalibrationFailure, "bisection did not reach the truncation target");
  }
  spec.a_const = a;
  spec.c_const = c;
  spec.calibrated = true;
  return cal;
}

Matrix observed_second_moment(const ScenarioSpec& spec, Rng& rng, Index count) {
  require_calibrated(spec);
  const Index p = spec.dim();
  Matrix acc = Matrix::Zero(p, p);
  Index seen = 0;
  while (seen < count) {
    const Index batch = std::max<Index>(1000, 2 * (count - seen));
    const FullSample s = generate_full_sample(spec, rng, batch);
    for (Index i = 0; i < batch && seen < count; ++i) {
      if (s.l[i] < s.y[i] && s.y[i] < s.r[i]) {
        acc.selfadjointView<Eigen::Lower>().rankUpdate(s.x.row(i).transpose());
        ++seen;
      }
    }
  }
  Matrix sigma = acc.selfadjointView<Eigen::Lower>();
  return sigma / static_cast<double>(count);
}

double model_error(const Vector& beta_hat, const Vector& beta0, const Matrix& sigma) {
  const Vector d = beta_hat - beta0;
  return std::max(0.0, d.dot(sigma * d));
}

SelectionMetrics selection_metrics(const Vector& beta_hat, const Vector& beta0) {
  if (beta_hat.size() != beta0.size()) throw Error(ErrorKind::DimensionMismatch, "coefficient lengths differ");
  SelectionMetrics m;
  m.exact_match = true;
  for (Index j = 0; j < beta0.size(); ++j) {
    const bool truly_zero = beta0[j] == 0.0;
    const bool est_zero = beta_hat[j] == 0.0;
    if (truly_zero && est_zero) ++m.cn;
    if (!truly_zero && est_zero) ++m.in;
    if (truly_zero != est_zero) m.exact_match = false;
  }
  return m;
}

FitResult fit_naive(const Dataset& data, int grid_size, double gamma, const EstimatorOptions& opts) {
  const Index n = data.size();
  const Index p = data.dim();
  if (n < p + 2) throw Error(ErrorKind::TooFewObservations, "naive fit needs n >= p + 2");
  const double inv_n = 1.0 / static_cast<double>(n);

  // Rows scaled by 1/n so the penalty sits on the same scale as the BIC loss.
  LinearSystem sys;
  sys.design.resize(n + p, p + 1);
  sys.design.setZero();
  sys.design.topLeftCorner(n, 1).setConstant(inv_n);
  sys.design.topRightCorner(n, p) = data.x() * inv_n;
  sys.response = Vector::Zero(n + p);
  sys.response.head(n) = data.y() * inv_n;

  LadOptions lad = opts.lad;
  lad.warm_start.reset();
  const Vector full = solve_lad(sys, lad).beta;  // penalty rows are zero here
  const AdaptiveWeights w = adaptive_weights(full.tail(p), gamma);
  lad.warm_start = full;

  auto plain_loss = [&](const Vector& coef) {
    return (data.y() - data.x() * coef.tail(p)).array().operator-(coef[0]).abs().sum() * inv_n;
  };
  auto fit_at = [&](double lambda) {
    for (Index j = 0; j < p; ++j) sys.design(n + j, j + 1) = lambda * w.w[j];
    Vector coef = solve_lad(sys, lad).beta;
    Vector slopes = coef.tail(p);
    threshold_zeros(slopes, opts.zero_tol);
    coef.tail(p) = slopes;
    return coef;
  };

  // lambda_max: subgradient bound at zero slopes, then halving/doubling.
  std::vector<double> centred(data.y().data(), data.y().data() + n);
  const double med = median_of(centred);
  Vector g = Vector::Zero(p);
  for (Index i = 0; i < n; ++i) {
    const double r = data.y()[i] - med;
    if (r != 0.0) g += (r > 0.0 ? inv_n : -inv_n) * data.x().row(i).transpose();
  }
  double lambda_max = 0.0;
  for (Index j = 0; j < p; ++j) lambda_max = std::max(lambda_max, std::abs(g[j]) / w.w[j]);
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) lambda_max = 1.0;
  auto zero_at = [&](double lambda) { return (fit_at(lambda).tail(p).array() != 0.0).count() == 0; };
  if (zero_at(lambda_max)) {
    for (int k = 0; k < 60 && zero_at(lambda_max / 2.0); ++k) lambda_max /= 2.0;
  } else {
    bool found = false;
    for (int k = 0; k < 60 && !found; ++k) {
      lambda_max *= 2.0;
      found = zero_at(lambda_max);
    }
    if (!found) throw Error(ErrorKind::GridDegenerate, "naive fit: no all-zero lambda found");
  }

  const double c_n = bic_multiplier(p);
  const double log_term = std::log(static_cast<double>(n)) * inv_n * c_n;
  FitResult best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_size; ++k) {
    const double lambda =
        grid_size == 1 ? lambda_max : lambda_max * std::pow(10.0, -4.0 * k / (grid_size - 1));
    const Vector coef = fit_at(lambda);
    const auto df = static_cast<double>((coef.tail(p).array() != 0.0).count());
    const double b = plain_loss(coef) + log_term * df;
    if (b < best_bic) {
      best_bic = b;
      best.beta = coef.tail(p);
      best.objective = plain_loss(coef);
    }
  }
  best.iterations = 1;
  best.converged = true;
  best.stop = StopReason::PairSetFixedPoint;
  best.active_set = support_of(best.beta);
  return best;
}

FitResult fit_oracle(const Dataset& data, const std::vector<Index>& support, const EstimatorOptions& opts) {
  FitResult out;
  if (support.empty()) {
    out.beta = Vector::Zero(data.dim());
    out.objective = loss(data, out.beta);
    out.converged = true;
    out.stop = StopReason::PairSetFixedPoint;
    return out;
  }
  const Dataset sub = data.columns(support);
  FitResult inner = fit_unpenalized(sub, opts);
  out = inner;
  out.beta = Vector::Zero(data.dim());
  for (std::size_t k = 0; k < support.size(); ++k) out.beta[support[k]] = inner.beta[static_cast<Index>(k)];
  out.objective = loss(data, out.beta);
  out.active_set = support_of(out.beta);
  return out;
}

ProposedFit fit_proposed(const Dataset& data, int grid_size, double gamma, const EstimatorOptions& opts) {
  ProposedFit out;
  out.unpenalized = fit_unpenalized(data, opts);
  out.weights = adaptive_weights(out.unpenalized.beta, gamma);
  out.grid = lambda_grid(data, out.weights, out.unpenalized.beta, grid_size, opts);
  out.selection = select_lambda(data, out.weights, out.unpenalized.beta, out.grid.values, opts);
  return out;
}

MethodSummary summarize(const std::string& method, const std::vector<double>& me,
                        const std::vector<SelectionMetrics>& metrics) {
  MethodSummary s;
  s.method = method;
  if (me.empty()) return s;
  s.me_median = median_of(me);
  std::vector<double> dev(me.size());
  std::transform(me.begin(), me.end(), dev.begin(), [&](double v) { return std::abs(v - s.me_median); });
  s.me_mad = median_of(dev);
  double cn = 0.0, in = 0.0, hits = 0.0;
  for (const auto& m : metrics) {
    cn += static_cast<double>(m.cn);
    in += static_cast<double>(m.in);
    hits += m.exact_match ? 1.0 : 0.0;
  }
  const auto count = static_cast<double>(metrics.size());
  s.cn = cn / count;
  s.in = in / count;
  s.rcm = 100.0 * hits / count;
  return s;
}

StudySummary run_study(StudyConfig config, std::uint64_t master_seed) {
  if (config.replications < 1) throw Error(ErrorKind::Config, "replications must be at least 1");
  ScenarioSpec& spec = config.scenario;
  StudySummary summary;
  constexpr std::uint64_t kCalibrationStream = 1ull << 40;
  if (!spec.calibrated) {
    Rng rng = make_stream(master_seed, kCalibrationStream);
    summary.calibration = calibrate_truncation(spec, spec.truncation_target, rng);
  } else {
    summary.calibration = {spec.a_const, spec.c_const, 0.0, 0.0};
  }
  Rng sigma_rng = make_stream(master_seed, kCalibrationStream + 1);
  const Matrix sigma = observed_second_moment(spec, sigma_rng, config.sigma_sample);
  const std::vector<Index> support = spec.support();

  summary.replications = config.replications;
  summary.records.resize(static_cast<std::size_t>(config.replications));
  parallel_for(config.replications, config.workers, [&](long k) {
    ReplicateRecord& rec = summary.records[static_cast<std::size_t>(k)];
    Rng rng = make_stream(master_seed, static_cast<std::uint64_t>(k));
    try {
      const Dataset data = apply_truncation(generate_full_sample(spec, rng));
      rec.observed = data.size();
      const ProposedFit proposed = fit_proposed(data, config.grid_size, config.gamma, config.estimator);
      rec.proposed = proposed.selection.fit.beta;
      rec.naive = fit_naive(data, config.grid_size, config.gamma, config.estimator).beta;
      rec.oracle = fit_oracle(data, support, config.estimator).beta;
      const Vector* fits[3] = {&rec.proposed, &rec.naive, &rec.oracle};
      for (int m = 0; m < 3; ++m) {
        rec.me[m] = model_error(*fits[m], spec.beta0, sigma);
        rec.metrics[m] = selection_metrics(*fits[m], spec.beta0);
      }
      if (config.compute_se) {
        SeOptions se;
        se.replicates = config.se_reps;
        se.seed = master_seed ^ (0x5851f42d4c957f2dull * (static_cast<std::uint64_t>(k) + 1));
        rec.se = estimate_se(data, proposed.selection, proposed.weights, proposed.unpenalized.beta, se,
                             config.estimator);
      }
      rec.ok = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.failure = e.what();
    }
  });

  static const char* names[3] = {"Proposed", "Naive", "Oracle"};
  std::vector<double> me[3];
  std::vector<SelectionMetrics> metrics[3];
  for (const auto& rec : summary.records) {
    if (!rec.ok) {
      ++summary.failures;
      continue;
    }
    for (int m = 0; m < 3; ++m) {
      me[m].push_back(rec.me[m]);
      metrics[m].push_back(rec.metrics[m]);
    }
  }
  if (summary.failures > config.max_failure_fraction * config.replications) {
    std::string first;
    for (const auto& rec : summary.records) {
      if (!rec.ok) {
        first = rec.failure;
        break;
      }
    }
    throw Error(ErrorKind::StudyAborted, std::to_string(summary.failures) + " of " +
                                             std::to_string(config.replications) +
                                             " replications failed; first: " + first);
  }
  for (int m = 0; m < 3; ++m) summary.methods.push_back(summarize(names[m], me[m], metrics[m]));
  return summary;
}

}  // namespace dtsel
