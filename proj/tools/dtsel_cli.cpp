#include <iostream>

#include <CLI11.hpp>

#include "dtsel/io.hpp"
#ifdef DTSEL_DEV_ORACLES
#include "dtsel/oracles.hpp"
#endif

namespace {

void add_shared(CLI::App* cmd, dtsel::io::RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "Input file")->required();
  cmd->add_option("--output", cfg.output, "Output file");
  cmd->add_option("--seed", cfg.seed, "Master random seed")
      ->each([&cfg](const std::string&) { cfg.seed_explicit = true; });
  cmd->add_option("--gamma", cfg.gamma, "Adaptive weight exponent")->capture_default_str();
  cmd->add_option("--grid-size", cfg.grid_size, "Number of lambda values")->capture_default_str();
  cmd->add_option("--se-reps", cfg.se_reps, "Random-weighting replicates")->capture_default_str();
  cmd->add_option("--max-iter", cfg.max_iter, "Fixed-indicator iteration limit")->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "Coefficient convergence tolerance")->capture_default_str();
  cmd->add_option("--workers", cfg.workers, "Worker threads")
      ->each([&cfg](const std::string&) { cfg.workers_explicit = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable selection for linear regression with doubly truncated responses"};
  app.require_subcommand(1);
  dtsel::io::RunConfig cfg;

  auto* fit = app.add_subcommand("fit", "Fit, select lambda by BIC and estimate standard errors");
  add_shared(fit, cfg);
  fit->add_option("--lambda", cfg.lambda, "Use this lambda instead of BIC selection (0 disables the penalty)");
  fit->add_option("--train-fraction", cfg.train_fraction, "Fit on a seeded random fraction; hold out the rest");

  auto* predict = app.add_subcommand("predict", "Predict responses from a fitted model");
  add_shared(predict, cfg);
  predict->add_option("--model", cfg.model, "Model file written by fit")->required();

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo study from a scenario file");
  add_shared(simulate, cfg);

  auto* se = app.add_subcommand("se", "Re-estimate random-weighting standard errors for a stored model");
  add_shared(se, cfg);
  se->add_option("--model", cfg.model, "Model file written by fit")->required();

#ifdef DTSEL_DEV_ORACLES
  double lower = -5.0, upper = 5.0, step = 1e-3;
  auto* grid = app.add_subcommand("grid-min", "Brute-force grid minimiser of the loss (p <= 2)");
  grid->group("");
  grid->add_option("--input", cfg.input)->required();
  grid->add_option("--lower", lower);
  grid->add_option("--upper", upper);
  grid->add_option("--step", step);
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) {
      dtsel::io::cmd_fit(cfg);
    } else if (predict->parsed()) {
      const auto pred = dtsel::io::cmd_predict(cfg);
      if (cfg.output.empty()) {
        for (double v : pred) std::cout << dtsel::io::format_double(v) << '\n';
      }
    } else if (simulate->parsed()) {
      const auto summary = dtsel::io::cmd_simulate(cfg);
      if (cfg.output.empty()) dtsel::io::write_summary(std::cout, summary);
    } else if (se->parsed()) {
      dtsel::io::cmd_se(cfg);
    }
#ifdef DTSEL_DEV_ORACLES
    else if (grid->parsed()) {
      const auto data = dtsel::io::read_csv(cfg.input);
      const std::vector<dtsel::oracle::GridBounds> bounds(static_cast<std::size_t>(data.dim()), {lower, upper});
      const auto beta = dtsel::oracle::grid_min_loss(data, bounds, step);
      for (dtsel::Index j = 0; j < beta.size(); ++j) std::cout << dtsel::io::format_double(beta[j]) << '\n';
    }
#endif
  } catch (const dtsel::Error& e) {
    std::cerr << "dtsel: " << e.what() << '\n';
    return dtsel::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "dtsel: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
