#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtsel/simulation.hpp"

namespace dtsel::io {

/// Parsed covariate table; y/l/r are present only when the file has them.
struct Table {
  std::vector<std::string> names;  // x1..xp
  Matrix x;
  std::optional<Vector> y, l, r;
  std::vector<long> lines;  // source line of each row
};

/// Header row naming y, l, r and x1..xp in any order. Missing covariates,
/// unknown columns or malformed numbers raise Parse with the line number.
Table read_table(std::istream& in, bool require_response = true);
Table read_table_file(const std::string& path, bool require_response = true);

/// read_table + validation; validation errors report the source line.
Dataset read_csv(const std::string& path);
Dataset to_dataset(const Table& table);

/// Writes y,l,r,x1..xp with 17 significant digits.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

std::string format_double(double v);

struct RunConfig {
  std::string input;
  std::string output;
  std::string model;
  std::uint64_t seed = 1;
  double gamma = 1.0;
  int grid_size = 50;
  int se_reps = 500;
  int max_iter = 50;
  double tol = 1e-6;
  int workers = 1;
  std::optional<double> lambda;          // forced lambda; 0 disables selection
  std::optional<double> train_fraction;  // seeded split, held-out rows written alongside
  bool seed_explicit = false;            // --seed given; overrides a scenario file's seed
  bool workers_explicit = false;
  void check() const;
  EstimatorOptions estimator() const;
};

/// Fitted model persisted by `fit` and consumed by `predict` and `se`.
struct Model {
  std::vector<std::string> names;
  Vector beta;
  Vector unpenalized;
  Vector weights;
  double gamma = 1.0;
  double lambda_hat = 0.0;
  double intercept = 0.0;  // median training residual
  std::vector<Index> active;
  Vector se;
  Vector se_mad;
};

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

/// Coefficient report: name,estimate,se with "-" for zero coefficients.
void write_report(std::ostream& out, const Model& model);
void write_trace(std::ostream& out, const std::vector<TraceEntry>& trace);
void write_summary(std::ostream& out, const StudySummary& summary);

struct FitOutputs {
  Model model;
  SelectionResult selection;
  FitResult unpenalized;
  SeEstimate se;
};

/// fit: unpenalised fit, weights, grid, BIC, random-weighting SEs. Writes
/// <output> (report), <output>.trace.csv, <output>.diag.txt and
/// <output>.model.json; with train_fraction also <output>.holdout.csv.
FitOutputs cmd_fit(const RunConfig& config);

/// predict: y_hat = intercept + beta'x for every row of config.input using the
/// model at config.model. Writes index,y_true,y_pred.
std::vector<double> cmd_predict(const RunConfig& config);

/// se: re-estimates random-weighting SEs for a stored model on config.input.
SeEstimate cmd_se(const RunConfig& config);

/// Scenario file: key = value lines (n_tilde, error_law, truncation_target,
/// replications, seed, grid_size, gamma, se, se_reps, workers). '#' comments.
StudyConfig parse_study_config(std::istream& in, std::uint64_t& seed);

/// simulate: writes the summary table to <output> and the calibrated window
/// constants to <output>.calibration.txt.
StudySummary cmd_simulate(const RunConfig& config);

}  // namespace dtsel::io
