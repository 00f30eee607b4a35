#include <doctest.h>

#include "helpers.hpp"

using namespace dtsel;
using test::vec;

TEST_CASE("study layout") {
  CHECK(scenario_dimension(300) == 21);
  CHECK(scenario_dimension(500) == 24);
  const ScenarioSpec s = study_scenario(300, ErrorLaw::Normal, 0.3);
  CHECK(s.dim() == 21);
  CHECK(s.support().size() == 7);
  CHECK(s.beta0[0] == 3.12);
  CHECK(s.beta0[6] == -1.32);
  CHECK(s.beta0[7] == 0.0);
  CHECK(s.covariates[0].kind == CovariateLaw::Kind::Bernoulli);
  CHECK(s.covariates[7].kind == CovariateLaw::Kind::Uniform);
  CHECK(s.covariates[9].b == 0.0);
  CHECK(s.b_vec[4] == doctest::Approx(0.249).epsilon(1e-12));
  CHECK(study_scenario(500, ErrorLaw::Normal, 0.3).support().size() == 8);
}

TEST_CASE("calibration hits the target on a fresh sample") {
  for (double target : {0.3, 0.4}) {
    ScenarioSpec s = study_scenario(300, ErrorLaw::Normal, target);
    Rng cal = make_stream(1, 100);
    const Calibration c = calibrate_truncation(s, target, cal);
    CHECK(std::abs(c.left_rate - target / 2) <= 0.005);
    CHECK(std::abs(c.right_rate - target / 2) <= 0.005);
    Rng rng = make_stream(1, 101);
    const FullSample f = generate_full_sample(s, rng, 100000);
    double left = 0, right = 0;
    for (Index i = 0; i < f.y.size(); ++i) {
      left += f.y[i] <= f.l[i];
      right += f.y[i] >= f.r[i];
    }
    CHECK(std::abs(left / 1e5 - target / 2) <= 0.005);
    CHECK(std::abs(right / 1e5 - target / 2) <= 0.005);
    CHECK(std::abs(1.0 - (left + right) / 1e5 - (1 - target)) <= 0.02);
  }
}

TEST_CASE("extreme-value errors follow the minimum law") {
  ScenarioSpec s = gaussian_scenario(300, vec({0.0}), ErrorLaw::MinExtremeValue, 0.3);
  Rng cal = make_stream(2, 0);
  calibrate_truncation(s, 0.3, cal, 20000);
  Rng rng = make_stream(2, 1);
  const FullSample f = generate_full_sample(s, rng, 200000);
  // CDF 1 - exp(-exp(x)): mean -0.5772, P(eps <= 0) = 1 - 1/e
  CHECK(f.y.mean() == doctest::Approx(-0.5772).epsilon(0.02));
  CHECK((f.y.array() <= 0.0).cast<double>().mean() == doctest::Approx(1 - std::exp(-1.0)).epsilon(0.01));
  CHECK(parse_error_law("ev") == ErrorLaw::MinExtremeValue);
  CHECK_THROWS_AS(parse_error_law("gumbel"), Error);
}

TEST_CASE("target below the supported range is rejected") {
  ScenarioSpec s = study_scenario(300, ErrorLaw::Normal, 0.0);
  Rng rng(1);
  try {
    calibrate_truncation(s, 0.0, rng);
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("infinite windows keep every record") {
  FullSample f;
  f.x = Matrix::Ones(5, 1);
  f.y = vec({1, 2, 3, 4, 5});
  f.l = Vector::Constant(5, -std::numeric_limits<double>::max());
  f.r = Vector::Constant(5, std::numeric_limits<double>::max());
  CHECK(apply_truncation(f).size() == 5);
  f.l = Vector::Constant(5, 10.0);
  f.r = Vector::Constant(5, 20.0);
  CHECK_THROWS_AS(apply_truncation(f), Error);
}

TEST_CASE("model error and selection metrics") {
  const Vector b0 = vec({1, 0, -2, 0, 0});
  CHECK(model_error(b0, b0, Matrix::Identity(5, 5)) == 0.0);
  CHECK(model_error(b0 + vec({1, 0, 0, 0, 0}), b0, Matrix::Identity(5, 5)) == 1.0);
  auto m = selection_metrics(b0, b0);
  CHECK(m.cn == 3);
  CHECK(m.in == 0);
  CHECK(m.exact_match);
  m = selection_metrics(Vector::Zero(5), b0);
  CHECK(m.cn == 3);
  CHECK(m.in == 2);
  CHECK_FALSE(m.exact_match);
  m = selection_metrics(vec({1, 0.1, -2, 0, 0}), b0);
  CHECK(m.cn == 2);
  CHECK_FALSE(m.exact_match);
}

TEST_CASE("oracle fit on all or no columns") {
  const Dataset d = test::truncated_sample(vec({1.5, -1.0, 0.0}), 70, 14);
  CHECK(fit_oracle(d, {0, 1, 2}).beta == fit_unpenalized(d).beta);
  CHECK(fit_oracle(d, {}).beta.isZero(0));
  const FitResult partial = fit_oracle(d, {0, 1});
  CHECK(partial.beta[2] == 0.0);
}

TEST_CASE("naive fit agrees with the proposed fit on wide windows") {
  ScenarioSpec s = gaussian_scenario(300, vec({2.0, 0.0, -1.5}), ErrorLaw::Normal, 0.3);
  s.a_const = -1e6;
  s.c_const = 2e6;
  s.spread = 1.0;
  s.b_floor = -10.0;
  s.calibrated = true;
  Rng rng = make_stream(8, 0);
  const Dataset d = apply_truncation(generate_full_sample(s, rng, 150));
  CHECK(d.size() == 150);
  const FitResult naive = fit_naive(d, 20);
  const ProposedFit prop = fit_proposed(d, 20);
  CHECK(support_of(naive.beta) == support_of(prop.selection.fit.beta));
  CHECK(support_of(naive.beta) == std::vector<Index>{0, 2});
}

TEST_CASE("study: single replication, determinism and worker independence") {
  StudyConfig cfg;
  cfg.scenario = gaussian_scenario(120, vec({1.5, 0.0, -1.0, 0.0}), ErrorLaw::Normal, 0.3);
  cfg.replications = 1;
  cfg.grid_size = 10;
  cfg.sigma_sample = 20000;
  const StudySummary one = run_study(cfg, 42);
  REQUIRE(one.records.size() == 1);
  REQUIRE(one.records[0].ok);
  CHECK(one.methods[0].me_median == one.records[0].me[0]);
  CHECK(one.methods[0].me_mad == 0.0);
  CHECK(one.methods[2].in == 0.0);
  CHECK(one.methods[2].cn == 2.0);

  cfg.replications = 4;
  const StudySummary a = run_study(cfg, 42);
  cfg.workers = 4;
  const StudySummary b = run_study(cfg, 42);
  for (int m = 0; m < 3; ++m) {
    CHECK(a.methods[m].me_median == b.methods[m].me_median);
    CHECK(a.methods[m].rcm == b.methods[m].rcm);
  }
  for (std::size_t k = 0; k < a.records.size(); ++k) CHECK(a.records[k].proposed == b.records[k].proposed);
  CHECK(a.records[0].proposed == one.records[0].proposed);
}

TEST_CASE("summary statistics") {
  std::vector<SelectionMetrics> m(4, SelectionMetrics{3, 0, true});
  m[1].exact_match = false;
  m[1].in = 1;
  const MethodSummary s = summarize("x", {1.0, 4.0, 2.0, 10.0}, m);
  CHECK(s.me_median == 3.0);
  // deviations 2, 1, 1, 7 -> raw median 1.5
  CHECK(s.me_mad == 1.5);
  CHECK(s.cn == 3.0);
  CHECK(s.in == 0.25);
  CHECK(s.rcm == 75.0);
}
