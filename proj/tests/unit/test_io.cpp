#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtsel/io.hpp"
#include "helpers.hpp"

using namespace dtsel;
using test::vec;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dtsel_io_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("one-row table") {
  std::istringstream in("y,l,r,x1\n2,0,3,1\n");
  const Dataset d = io::to_dataset(io::read_table(in));
  CHECK(d.size() == 1);
  CHECK(d.dim() == 1);
  CHECK(d.x()(0, 0) == 1.0);
}

TEST_CASE("columns in any order and blank lines") {
  std::istringstream in("x2,r,y,x1,l\r\n\n5,3,2,1,0\r\n6,4,3,2,1\n\n");
  const io::Table t = io::read_table(in);
  REQUIRE(t.x.rows() == 2);
  CHECK(t.x(0, 0) == 1.0);
  CHECK(t.x(0, 1) == 5.0);
  CHECK((*t.y)[1] == 3.0);
  CHECK(t.lines == std::vector<long>{3, 4});
}

TEST_CASE("window violation carries the line number") {
  std::istringstream in("y,l,r,x1\n2,0,3,1\n\n5,0,3,1\n");
  try {
    io::to_dataset(io::read_table(in));
    FAIL("expected WindowViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowViolation);
    CHECK(e.index() == 4);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("parse errors") {
  auto kind_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      io::read_table(in);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Config;
  };
  CHECK(kind_of("y,l,r,x1,x2,x4,x5\n1,0,2,1,1,1,1\n") == ErrorKind::Parse);
  CHECK(kind_of("y,l,r,x1,z\n1,0,2,1,1\n") == ErrorKind::Parse);
  CHECK(kind_of("y,l,r,x1\n1,0,2\n") == ErrorKind::Parse);
  CHECK(kind_of("y,l,r,x1\n1,0,2,1e\n") == ErrorKind::Parse);
  CHECK(kind_of("y,l,r,x1\n1,0,2,\"1\"\n") == ErrorKind::Parse);
  CHECK(kind_of("y,l,r,x1\n1;0;2;1\n") == ErrorKind::Parse);
  CHECK(kind_of("y,r,x1\n1,2,1\n") == ErrorKind::Parse);
  CHECK(kind_of("") == ErrorKind::Parse);
  std::istringstream bad("y,l,r,x1\n1,0,2,1\n1,0,2,x\n");
  try {
    io::read_table(bad);
  } catch (const Error& e) {
    CHECK(e.index() == 3);
    CHECK(std::string(e.what()).find("column 4") != std::string::npos);
  }
}

TEST_CASE("csv round trip is value identical") {
  const Dataset d = test::truncated_sample(vec({1.0, -0.3, 0.7}), 50, 19);
  const std::string path = temp_path("roundtrip.csv");
  io::write_csv(path, d);
  const Dataset back = io::read_csv(path);
  CHECK(back.y() == d.y());
  CHECK(back.l() == d.l());
  CHECK(back.r() == d.r());
  CHECK(back.x() == d.x());
  std::remove(path.c_str());
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("tables without responses are allowed for prediction") {
  std::istringstream in("x1,x2\n1,2\n3,4\n");
  const io::Table t = io::read_table(in, false);
  CHECK_FALSE(t.y.has_value());
  CHECK(t.x.rows() == 2);
}

TEST_CASE("study config parsing") {
  std::istringstream in("# desk run\nn_tilde = 300\nerror_law = ev\ntruncation_target = 0.4\nreplications = 3\n"
                        "seed = 17\ngrid_size = 10\ngamma = 1\nse = yes\nse_reps = 20\nworkers = 2\n");
  std::uint64_t seed = 1;
  const StudyConfig c = io::parse_study_config(in, seed);
  CHECK(seed == 17);
  CHECK(c.scenario.error == ErrorLaw::MinExtremeValue);
  CHECK(c.scenario.truncation_target == 0.4);
  CHECK(c.replications == 3);
  CHECK(c.compute_se);
  CHECK(c.workers == 2);

  auto message_of = [](const std::string& text) {
    std::istringstream s(text);
    std::uint64_t sd = 0;
    try {
      io::parse_study_config(s, sd);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message_of("error_law = cauchy\n").find("error_law") != std::string::npos);
  CHECK(message_of("replications = many\n").find("replications") != std::string::npos);
  CHECK(message_of("colour = blue\n").find("colour") != std::string::npos);
  CHECK(message_of("truncation_target = 0.01\n").find("truncation_target") != std::string::npos);
}

TEST_CASE("run config checks") {
  io::RunConfig c;
  CHECK_NOTHROW(c.check());
  c.tol = 0;
  CHECK_THROWS_AS(c.check(), Error);
  c = {};
  c.train_fraction = 1.0;
  CHECK_THROWS_AS(c.check(), Error);
  c = {};
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.check(), Error);
}

TEST_CASE("fit, predict and se commands") {
  const Vector beta0 = vec({1.5, -1.0, 0.0, 0.8});
  const Dataset d = test::truncated_sample(beta0, 100, 23);
  const std::string input = temp_path("fit_in.csv");
  io::write_csv(input, d);

  io::RunConfig cfg;
  cfg.input = input;
  cfg.output = temp_path("fit_report.csv");
  cfg.grid_size = 12;
  cfg.se_reps = 30;
  cfg.seed = 4;
  const io::FitOutputs a = io::cmd_fit(cfg);
  const std::string report = slurp(cfg.output);
  CHECK(report.rfind("name,estimate,se\n", 0) == 0);
  CHECK(slurp(cfg.output + ".trace.csv").rfind("lambda,bic,df,loss\n", 0) == 0);
  CHECK(std::filesystem::exists(cfg.output + ".diag.txt"));
  for (Index j = 0; j < 4; ++j) {
    if (a.model.beta[j] == 0.0) CHECK(report.find("x" + std::to_string(j + 1) + ",0,-") != std::string::npos);
  }
  io::cmd_fit(cfg);
  CHECK(slurp(cfg.output) == report);

  // intercept is the median training residual
  std::vector<double> res;
  for (Index i = 0; i < d.size(); ++i) res.push_back(d.y()[i] - d.x().row(i).dot(a.model.beta));
  std::sort(res.begin(), res.end());
  CHECK(a.model.intercept == doctest::Approx(0.5 * (res[49] + res[50])).epsilon(1e-15));

  // predicting the training rows
  io::RunConfig pc;
  pc.input = input;
  pc.model = cfg.output + ".model.json";
  pc.output = temp_path("pred.csv");
  const std::vector<double> pred = io::cmd_predict(pc);
  REQUIRE(pred.size() == static_cast<std::size_t>(d.size()));
  std::vector<double> abs_err, abs_res;
  for (Index i = 0; i < d.size(); ++i) {
    abs_err.push_back(std::abs(d.y()[i] - pred[static_cast<std::size_t>(i)]));
    abs_res.push_back(std::abs(res[static_cast<std::size_t>(i)] - a.model.intercept));
  }
  std::sort(abs_err.begin(), abs_err.end());
  std::sort(abs_res.begin(), abs_res.end());
  CHECK(abs_err[50] <= abs_res[50] + 1e-12);
  CHECK(slurp(pc.output).rfind("index,y_true,y_pred\n", 0) == 0);

  // stored model round trip and SE re-estimation
  const io::Model m = io::load_model(pc.model);
  CHECK(m.beta == a.model.beta);
  CHECK(m.unpenalized == a.model.unpenalized);
  io::RunConfig sc = pc;
  sc.output = temp_path("se.csv");
  sc.se_reps = 30;
  sc.seed = 4;
  const SeEstimate se = io::cmd_se(sc);
  CHECK(se.se == a.se.se);

  // lambda forced to zero: dense, equal to the unpenalised fit
  io::RunConfig dense = cfg;
  dense.lambda = 0.0;
  dense.se_reps = 0;
  const io::FitOutputs z = io::cmd_fit(dense);
  CHECK(z.model.beta == z.unpenalized.beta);
  CHECK(z.model.active.size() == 4);

  // seeded 7:3 split
  io::RunConfig split = cfg;
  split.train_fraction = 0.7;
  split.se_reps = 0;
  split.output = temp_path("split.csv");
  io::cmd_fit(split);
  CHECK(io::read_csv(split.output + ".holdout.csv").size() == 30);

  // column mismatch
  const std::string narrow = temp_path("narrow.csv");
  {
    std::ofstream f(narrow);
    f << "x1,x2\n1,2\n";
  }
  pc.input = narrow;
  try {
    io::cmd_predict(pc);
    FAIL("expected ColumnMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ColumnMismatch);
  }
}

TEST_CASE("zero coefficients predict the training median of y") {
  std::vector<Observation> rows;
  Rng rng(3);
  std::normal_distribution<double> z(0, 1);
  for (int i = 0; i < 41; ++i) {
    const double y = z(rng);
    rows.push_back({y, y - 1, y + 1, vec({z(rng)})});
  }
  const Dataset d = Dataset::validate(rows, 1);
  io::Model m;
  m.names = {"x1"};
  m.beta = Vector::Zero(1);
  m.unpenalized = m.weights = Vector::Ones(1);
  std::vector<double> ys(d.y().data(), d.y().data() + 41);
  std::nth_element(ys.begin(), ys.begin() + 20, ys.end());
  m.intercept = ys[20];
  const std::string model = temp_path("zero.json");
  io::save_model(model, m);
  const std::string input = temp_path("zero.csv");
  io::write_csv(input, d);
  io::RunConfig pc;
  pc.input = input;
  pc.model = model;
  for (double v : io::cmd_predict(pc)) CHECK(v == ys[20]);
}

TEST_CASE("intercept recovers a known shift on untruncated data") {
  ScenarioSpec s = gaussian_scenario(400, vec({1.0, -0.5}), ErrorLaw::Normal, 0.3);
  s.a_const = -1e6;
  s.c_const = 2e6;
  s.spread = 1.0;
  s.b_floor = -10.0;
  s.calibrated = true;
  Rng rng = make_stream(6, 0);
  const Dataset d = apply_truncation(generate_full_sample(s, rng, 400)).shifted(3.0);
  const std::string input = temp_path("shift.csv");
  io::write_csv(input, d);
  io::RunConfig cfg;
  cfg.input = input;
  cfg.output = temp_path("shift_report.csv");
  cfg.grid_size = 10;
  cfg.se_reps = 0;
  const io::FitOutputs f = io::cmd_fit(cfg);
  // median of N(0,1) noise around the shift, sd of the median about 0.06
  CHECK(std::abs(f.model.intercept - 3.0) < 0.25);
}
