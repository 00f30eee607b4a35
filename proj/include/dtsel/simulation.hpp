#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtsel/random_weighting.hpp"

namespace dtsel {

enum class ErrorLaw { Normal, MinExtremeValue };
ErrorLaw parse_error_law(const std::string& name);
const char* to_string(ErrorLaw law);

struct CovariateLaw {
  enum class Kind { Bernoulli, Uniform, Gaussian };
  Kind kind = Kind::Gaussian;
  double a = 0.0;  // Bernoulli: success probability; Uniform: lower end
  double b = 0.0;  // Uniform: upper end
};

/// Full generative description of a scenario. The left truncation variable is
/// L ~ Uniform(a_const, a_const + spread + b_vec'x - b_floor) and R = L + c_const;
/// spread and b_floor are set by calibrate_truncation so the interval has
/// positive length for every covariate value that occurs in practice.
struct ScenarioSpec {
  int n_tilde = 300;
  Vector beta0;
  std::vector<CovariateLaw> covariates;
  double gaussian_rho = 0.3;  // corr(X_i, X_j) = rho^|i-j| within the Gaussian block
  ErrorLaw error = ErrorLaw::Normal;
  double truncation_target = 0.3;
  Vector b_vec;
  double a_const = 0.0;
  double c_const = 0.0;
  double spread = 0.0;
  double b_floor = 0.0;
  bool calibrated = false;

  Index dim() const { return beta0.size(); }
  std::vector<Index> support() const;
};

/// floor(7 n^(1/5)) covariates, floor(p/3) of them active.
Index scenario_dimension(int n_tilde);

/// Covariate layout and coefficients of the simulation study for a given full
/// sample size; b_vec = 0.1 |beta0|. Not yet calibrated.
ScenarioSpec study_scenario(int n_tilde, ErrorLaw error, double truncation_target);

/// Gaussian covariates with rho^|i-j| correlation and the given coefficients.
ScenarioSpec gaussian_scenario(int n_tilde, const Vector& beta0, ErrorLaw error,
                               double truncation_target);

struct FullSample {
  Matrix x;
  Vector y, l, r;
};

FullSample generate_full_sample(const ScenarioSpec& spec, Rng& rng, Index count);
FullSample generate_full_sample(const ScenarioSpec& spec, Rng& rng);

/// Keeps records with l < y < r. Throws TooFewObserved when fewer than p + 2 remain.
Dataset apply_truncation(const FullSample& sample);

/// Draws full records until exactly n are observed.
Dataset generate_observed(const ScenarioSpec& spec, Rng& rng, Index n);

struct Calibration {
  double a_const = 0.0;
  double c_const = 0.0;
  double left_rate = 0.0;   // on the pilot sample
  double right_rate = 0.0;
};

/// Bisection on (a, c) over a pilot sample so that P(Y <= L) and P(Y >= R)
/// are each target/2 within 0.005. Fills the window fields of `spec`.
Calibration calibrate_truncation(ScenarioSpec& spec, double target, Rng& rng,
                                 Index pilot_size = 100000);

/// E(X X') over observed records, estimated from `count` observations.
Matrix observed_second_moment(const ScenarioSpec& spec, Rng& rng, Index count = 100000);

double model_error(const Vector& beta_hat, const Vector& beta0, const Matrix& sigma);

struct SelectionMetrics {
  Index cn = 0;  // true zeros estimated as zero
  Index in = 0;  // true nonzeros estimated as zero
  bool exact_match = false;
};

SelectionMetrics selection_metrics(const Vector& beta_hat, const Vector& beta0);

/// Adaptive-LASSO L1 regression of y on (1, x) ignoring truncation, tuned by the
/// same modified BIC with the plain (1/n) sum |y - a - x'beta| loss. Returns
/// slopes only.
FitResult fit_naive(const Dataset& data, int grid_size = 50, double gamma = 1.0,
                    const EstimatorOptions& opts = {});

/// Unpenalised rank estimator on the support columns, zero elsewhere.
FitResult fit_oracle(const Dataset& data, const std::vector<Index>& support,
                     const EstimatorOptions& opts = {});

struct ProposedFit {
  FitResult unpenalized;
  AdaptiveWeights weights;
  LambdaGrid grid;
  SelectionResult selection;
};

/// Unpenalised fit, adaptive weights, lambda grid and BIC selection.
ProposedFit fit_proposed(const Dataset& data, int grid_size = 50, double gamma = 1.0,
                         const EstimatorOptions& opts = {});

struct StudyConfig {
  ScenarioSpec scenario;
  int replications = 200;
  int grid_size = 50;
  double gamma = 1.0;
  bool compute_se = false;
  int se_reps = 300;
  int workers = 1;
  double max_failure_fraction = 0.02;
  Index sigma_sample = 100000;
  EstimatorOptions estimator;
};

struct MethodSummary {
  std::string method;
  double me_median = 0.0;
  double me_mad = 0.0;
  double cn = 0.0;
  double in = 0.0;
  double rcm = 0.0;  // percent
};

struct ReplicateRecord {
  bool ok = false;
  std::string failure;
  Index observed = 0;
  Vector proposed, naive, oracle;
  double me[3] = {0.0, 0.0, 0.0};
  SelectionMetrics metrics[3];
  SeEstimate se;  // filled when compute_se
};

struct StudySummary {
  std::vector<MethodSummary> methods;  // Proposed, Naive, Oracle
  int replications = 0;
  int failures = 0;
  Calibration calibration;
  std::vector<ReplicateRecord> records;
};

/// Calibrates the scenario if needed, then runs `replications` independent
/// replications (replicate k uses make_stream(master_seed, k)). Failed
/// replications are excluded; more than max_failure_fraction aborts.
StudySummary run_study(StudyConfig config, std::uint64_t master_seed);

MethodSummary summarize(const std::string& method, const std::vector<double>& me,
                        const std::vector<SelectionMetrics>& metrics);

}  // namespace dtsel
