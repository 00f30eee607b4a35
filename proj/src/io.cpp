#include "dtsel/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace dtsel::io {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                        : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(long line, std::size_t column, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what,
              line);
}

double parse_number(const std::string& field, long line, std::size_t column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) parse_error(line, column, "not a number: '" + field + "'");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write '" + path + "'");
  out.precision(17);
  return out;
}

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  return m;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::vector<std::string> default_names(Index p) {
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

// Seeded shuffle; the first `keep` indices (sorted) train, the rest are held out.
std::pair<std::vector<Index>, std::vector<Index>> split_rows(Index n, double fraction, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng = make_stream(seed, 0x7e57u);
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  const auto keep = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  std::vector<Index> train(idx.begin(), idx.begin() + keep);
  std::vector<Index> test(idx.begin() + keep, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

}  // namespace

Table read_table(std::istream& in, bool require_response) {
  Table t;
  std::string line;
  long lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::Parse, "empty input: no header row", 0);
  if (lineno == 1 && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  int col_y = -1, col_l = -1, col_r = -1;
  std::map<Index, int> xcols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    int* slot = h == "y" ? &col_y : h == "l" ? &col_l : h == "r" ? &col_r : nullptr;
    if (slot) {
      if (*slot >= 0) parse_error(lineno, c + 1, "duplicate column '" + h + "'");
      *slot = static_cast<int>(c);
      continue;
    }
    Index k = 0;
    if (h.size() < 2 || h[0] != 'x' ||
        std::from_chars(h.data() + 1, h.data() + h.size(), k).ptr != h.data() + h.size() || k < 1) {
      parse_error(lineno, c + 1, "unknown column '" + h + "'");
    }
    if (!xcols.emplace(k, static_cast<int>(c)).second) parse_error(lineno, c + 1, "duplicate column '" + h + "'");
  }
  if (xcols.empty()) parse_error(lineno, 1, "no covariate columns x1..xp");
  const Index p = xcols.rbegin()->first;
  for (Index k = 1; k <= p; ++k) {
    if (!xcols.count(k)) parse_error(lineno, 1, "missing column x" + std::to_string(k) + " (header has x" +
                                                    std::to_string(p) + ")");
  }
  const bool has_window = col_l >= 0 || col_r >= 0;
  if (require_response && (col_y < 0 || col_l < 0 || col_r < 0)) {
    parse_error(lineno, 1, "header must name y, l and r");
  }
  if (has_window && (col_l < 0 || col_r < 0)) parse_error(lineno, 1, "l and r must appear together");
  t.names = default_names(p);

  std::vector<std::vector<double>> xs;
  std::vector<double> ys, ls, rs;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      parse_error(lineno, std::min(fields.size(), header.size()) + 1,
                  "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    auto num = [&](int c) { return parse_number(fields[static_cast<std::size_t>(c)], lineno, c + 1); };
    std::vector<double> row(static_cast<std::size_t>(p));
    for (const auto& [k, c] : xcols) row[static_cast<std::size_t>(k - 1)] = num(c);
    xs.push_back(std::move(row));
    if (col_y >= 0) ys.push_back(num(col_y));
    if (has_window) {
      ls.push_back(num(col_l));
      rs.push_back(num(col_r));
    }
    t.lines.push_back(lineno);
  }

  const auto n = static_cast<Index>(xs.size());
  t.x.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) t.x(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (col_y >= 0) t.y = from_std(ys);
  if (has_window) {
    t.l = from_std(ls);
    t.r = from_std(rs);
  }
  return t;
}

Table read_table_file(const std::string& path, bool require_response) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open '" + path + "'");
  return read_table(in, require_response);
}

Dataset to_dataset(const Table& t) {
  if (!t.y || !t.l || !t.r) throw Error(ErrorKind::Parse, "table lacks y, l or r", 0);
  try {
    return Dataset::validate(*t.y, *t.l, *t.r, t.x);
  } catch (const Error& e) {
    if (e.index() < 0 || e.index() >= static_cast<long>(t.lines.size())) throw;
    const long line = t.lines[static_cast<std::size_t>(e.index())];
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw Error(e.kind(), "line " + std::to_string(line) + ": " + msg, line);
  }
}

Dataset read_csv(const std::string& path) { return to_dataset(read_table_file(path, true)); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "y,l,r";
  for (Index j = 0; j < data.dim(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    out << format_double(data.y()[i]) << ',' << format_double(data.l()[i]) << ',' << format_double(data.r()[i]);
    for (Index j = 0; j < data.dim(); ++j) out << ',' << format_double(data.x()(i, j));
    out << '\n';
  }
}

void write_csv(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  write_csv(out, data);
}

void RunConfig::check() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::Config, what); };
  if (!(tol > 0.0)) bad("--tol must be positive");
  if (!(gamma > 0.0)) bad("--gamma must be positive");
  if (grid_size < 1) bad("--grid-size must be at least 1");
  if (se_reps < 0) bad("--se-reps must be non-negative");
  if (max_iter < 1) bad("--max-iter must be at least 1");
  if (workers < 1) bad("--workers must be at least 1");
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) bad("--lambda must be finite and non-negative");
  if (train_fraction && !(*train_fraction > 0.0 && *train_fraction < 1.0)) bad("--train-fraction must lie in (0, 1)");
}

EstimatorOptions RunConfig::estimator() const {
  EstimatorOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return opts;
}

void save_model(const std::string& path, const Model& m) {
  json j;
  j["names"] = m.names;
  j["beta"] = to_std(m.beta);
  j["unpenalized"] = to_std(m.unpenalized);
  j["weights"] = to_std(m.weights);
  j["gamma"] = m.gamma;
  j["lambda_hat"] = m.lambda_hat;
  j["intercept"] = m.intercept;
  j["active"] = m.active;
  j["se"] = to_std(m.se);
  j["se_mad"] = to_std(m.se_mad);
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open model '" + path + "'");
  Model m;
  try {
    const json j = json::parse(in);
    m.names = j.at("names").get<std::vector<std::string>>();
    m.beta = from_std(j.at("beta").get<std::vector<double>>());
    m.unpenalized = from_std(j.at("unpenalized").get<std::vector<double>>());
    m.weights = from_std(j.at("weights").get<std::vector<double>>());
    m.gamma = j.at("gamma").get<double>();
    m.lambda_hat = j.at("lambda_hat").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.active = j.at("active").get<std::vector<Index>>();
    m.se = from_std(j.at("se").get<std::vector<double>>());
    m.se_mad = from_std(j.at("se_mad").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, "model '" + path + "': " + e.what(), 0);
  }
  const auto p = static_cast<Index>(m.names.size());
  if (m.beta.size() != p || m.unpenalized.size() != p || m.weights.size() != p) {
    throw Error(ErrorKind::Parse, "model '" + path + "': inconsistent lengths", 0);
  }
  return m;
}

void write_report(std::ostream& out, const Model& m) {
  out << "name,estimate,se\n";
  std::vector<double> se(static_cast<std::size_t>(m.beta.size()), std::nan(""));
  for (std::size_t a = 0; a < m.active.size() && static_cast<Index>(a) < m.se.size(); ++a) {
    se[static_cast<std::size_t>(m.active[a])] = m.se[static_cast<Index>(a)];
  }
  for (Index j = 0; j < m.beta.size(); ++j) {
    out << m.names[static_cast<std::size_t>(j)] << ',' << format_double(m.beta[j]) << ',';
    const double s = se[static_cast<std::size_t>(j)];
    out << (m.beta[j] == 0.0 || std::isnan(s) ? std::string("-") : format_double(s)) << '\n';
  }
  out << "(intercept)," << format_double(m.intercept) << ",-\n";
}

void write_trace(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "lambda,bic,df,loss\n";
  for (const auto& e : trace) {
    out << format_double(e.lambda) << ',';
    if (e.excluded) {
      out << "NA,NA,NA\n";
    } else {
      out << format_double(e.bic) << ',' << e.df << ',' << format_double(e.loss) << '\n';
    }
  }
}

void write_summary(std::ostream& out, const StudySummary& s) {
  out << "method,me_median,me_mad,cn,in,rcm\n";
  for (const auto& m : s.methods) {
    out << m.method << ',' << format_double(m.me_median) << ',' << format_double(m.me_mad) << ','
        << format_double(m.cn) << ',' << format_double(m.in) << ',' << format_double(m.rcm) << '\n';
  }
}

FitOutputs cmd_fit(const RunConfig& config) {
  config.check();
  if (config.output.empty()) throw Error(ErrorKind::Config, "--output is required");
  const Dataset all = read_csv(config.input);
  Dataset train = all;
  if (config.train_fraction) {
    const auto [train_idx, test_idx] = split_rows(all.size(), *config.train_fraction, config.seed);
    train = all.rows(train_idx);
    write_csv(config.output + ".holdout.csv", all.rows(test_idx));
  }
  require_pairs(train);
  const EstimatorOptions opts = config.estimator();

  FitOutputs out;
  out.unpenalized = fit_unpenalized(train, opts);
  const AdaptiveWeights weights = adaptive_weights(out.unpenalized.beta, config.gamma);
  std::optional<LambdaGrid> grid;
  if (config.lambda) {
    out.selection.lambda_hat = *config.lambda;
    out.selection.fit = *config.lambda == 0.0
                            ? out.unpenalized
                            : fit_adaptive_lasso(train, *config.lambda, weights, out.unpenalized.beta, opts);
    if (*config.lambda == 0.0) out.selection.fit.active_set = support_of(out.selection.fit.beta);
    TraceEntry e;
    e.lambda = *config.lambda;
    e.loss = loss(train, out.selection.fit.beta);
    e.df = static_cast<Index>(out.selection.fit.active_set.size());
    e.bic = bic(train, out.selection.fit, bic_multiplier(train.dim()));
    out.selection.trace.push_back(e);
  } else {
    grid = lambda_grid(train, weights, out.unpenalized.beta, config.grid_size, opts);
    out.selection = select_lambda(train, weights, out.unpenalized.beta, grid->values, opts);
  }

  if (config.se_reps > 0 && !out.selection.fit.active_set.empty()) {
    SeOptions se;
    se.replicates = config.se_reps;
    se.seed = config.seed;
    se.workers = config.workers;
    out.se = estimate_se(train, out.selection, weights, out.unpenalized.beta, se, opts);
  } else {
    out.se.active = out.selection.fit.active_set;
  }

  Model& m = out.model;
  m.names = default_names(train.dim());
  m.beta = out.selection.fit.beta;
  m.unpenalized = out.unpenalized.beta;
  m.weights = weights.w;
  m.gamma = config.gamma;
  m.lambda_hat = out.selection.lambda_hat;
  m.intercept = median_of(to_std(train.y() - train.x() * m.beta));
  m.active = out.selection.fit.active_set;
  m.se = out.se.se;
  m.se_mad = out.se.se_mad;

  {
    auto f = open_out(config.output);
    write_report(f, m);
  }
  {
    auto f = open_out(config.output + ".trace.csv");
    write_trace(f, out.selection.trace);
  }
  {
    auto f = open_out(config.output + ".diag.txt");
    f << "n " << train.size() << "\np " << train.dim() << '\n'
      << "unpenalized_iterations " << out.unpenalized.iterations << '\n'
      << "unpenalized_stop " << to_string(out.unpenalized.stop) << '\n'
      << "unpenalized_converged " << (out.unpenalized.converged ? 1 : 0) << '\n'
      << "lambda_max " << format_double(grid ? grid->lambda_max : m.lambda_hat) << '\n'
      << "lambda_hat " << format_double(m.lambda_hat) << '\n'
      << "selected_iterations " << out.selection.fit.iterations << '\n'
      << "selected_stop " << to_string(out.selection.fit.stop) << '\n'
      << "selected_converged " << (out.selection.fit.converged ? 1 : 0) << '\n'
      << "df " << m.active.size() << '\n'
      << "se_replicates " << config.se_reps << '\n'
      << "se_failed " << out.se.failed << '\n'
      << "intercept " << format_double(m.intercept) << " (median training residual)\n";
  }
  save_model(config.output + ".model.json", m);
  return out;
}

std::vector<double> cmd_predict(const RunConfig& config) {
  config.check();
  if (config.model.empty()) throw Error(ErrorKind::Config, "--model is required");
  const Model m = load_model(config.model);
  const Table t = read_table_file(config.input, false);
  if (t.x.cols() != m.beta.size()) {
    throw Error(ErrorKind::ColumnMismatch, "input has " + std::to_string(t.x.cols()) + " covariates, model has " +
                                               std::to_string(m.beta.size()));
  }
  const Vector pred = (t.x * m.beta).array() + m.intercept;
  if (!config.output.empty()) {
    auto f = open_out(config.output);
    f << "index,y_true,y_pred\n";
    for (Index i = 0; i < pred.size(); ++i) {
      f << i << ',' << (t.y ? format_double((*t.y)[i]) : std::string()) << ',' << format_double(pred[i]) << '\n';
    }
  }
  return to_std(pred);
}

SeEstimate cmd_se(const RunConfig& config) {
  config.check();
  if (config.model.empty()) throw Error(ErrorKind::Config, "--model is required");
  if (config.se_reps < 1) throw Error(ErrorKind::Config, "--se-reps must be at least 1");
  const Model m = load_model(config.model);
  const Dataset data = read_csv(config.input);
  if (data.dim() != m.beta.size()) {
    throw Error(ErrorKind::ColumnMismatch, "input has " + std::to_string(data.dim()) + " covariates, model has " +
                                               std::to_string(m.beta.size()));
  }
  SelectionResult sel;
  sel.lambda_hat = m.lambda_hat;
  sel.fit.beta = m.beta;
  sel.fit.active_set = support_of(m.beta);
  AdaptiveWeights weights{m.weights, m.gamma, 1e8};
  SeOptions se;
  se.replicates = config.se_reps;
  se.seed = config.seed;
  se.workers = config.workers;
  SeEstimate est = estimate_se(data, sel, weights, m.unpenalized, se, config.estimator());
  if (!config.output.empty()) {
    auto f = open_out(config.output);
    f << "name,estimate,se,se_mad\n";
    for (std::size_t a = 0; a < est.active.size(); ++a) {
      const Index j = est.active[a];
      f << m.names[static_cast<std::size_t>(j)] << ',' << format_double(m.beta[j]) << ','
        << format_double(est.se[static_cast<Index>(a)]) << ',' << format_double(est.se_mad[static_cast<Index>(a)])
        << '\n';
    }
  }
  return est;
}

StudyConfig parse_study_config(std::istream& in, std::uint64_t& seed) {
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto as_int = [&](const std::string& key, long lo) {
    const std::string& v = kv.at(key);
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || out < lo) {
      throw Error(ErrorKind::Config, key + ": invalid value '" + v + "'");
    }
    return out;
  };
  auto as_double = [&](const std::string& key) {
    const std::string& v = kv.at(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw Error(ErrorKind::Config, key + ": invalid value '" + v + "'");
    }
    return out;
  };

  static const char* known[] = {"n_tilde", "error_law", "truncation_target", "replications", "seed",
                                "grid_size", "gamma", "se", "se_reps", "workers"};
  for (const auto& [key, value] : kv) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorKind::Config, key + ": unknown key");
    }
  }

  const int n_tilde = kv.count("n_tilde") ? static_cast<int>(as_int("n_tilde", 10)) : 300;
  ErrorLaw law = ErrorLaw::Normal;
  if (kv.count("error_law")) {
    try {
      law = parse_error_law(kv.at("error_law"));
    } catch (const Error&) {
      throw Error(ErrorKind::Config, "error_law: invalid value '" + kv.at("error_law") + "' (expected normal or ev)");
    }
  }
  const double target = kv.count("truncation_target") ? as_double("truncation_target") : 0.3;
  if (!(target >= 0.05 && target < 0.9)) {
    throw Error(ErrorKind::Config, "truncation_target: must lie in [0.05, 0.9)");
  }

  StudyConfig cfg;
  cfg.scenario = study_scenario(n_tilde, law, target);
  if (kv.count("replications")) cfg.replications = static_cast<int>(as_int("replications", 1));
  if (kv.count("grid_size")) cfg.grid_size = static_cast<int>(as_int("grid_size", 1));
  if (kv.count("gamma")) {
    cfg.gamma = as_double("gamma");
    if (!(cfg.gamma > 0.0)) throw Error(ErrorKind::Config, "gamma: must be positive");
  }
  if (kv.count("se")) {
    const std::string& v = kv.at("se");
    if (v == "1" || v == "true" || v == "yes") cfg.compute_se = true;
    else if (v == "0" || v == "false" || v == "no") cfg.compute_se = false;
    else throw Error(ErrorKind::Config, "se: invalid value '" + v + "'");
  }
  if (kv.count("se_reps")) cfg.se_reps = static_cast<int>(as_int("se_reps", 2));
  if (kv.count("workers")) cfg.workers = static_cast<int>(as_int("workers", 1));
  if (kv.count("seed")) {
    const std::string& v = kv.at("seed");
    std::uint64_t s = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
      throw Error(ErrorKind::Config, "seed: invalid value '" + v + "'");
    }
    seed = s;
  }
  return cfg;
}

StudySummary cmd_simulate(const RunConfig& config) {
  config.check();
  if (config.output.empty()) throw Error(ErrorKind::Config, "--output is required");
  std::ifstream in(config.input);
  if (!in) throw Error(ErrorKind::Config, "cannot open scenario file '" + config.input + "'");
  std::uint64_t seed = config.seed;
  StudyConfig study = parse_study_config(in, seed);
  if (config.seed_explicit) seed = config.seed;
  if (config.workers_explicit) study.workers = config.workers;
  study.estimator = config.estimator();

  const StudySummary summary = run_study(study, seed);
  {
    auto f = open_out(config.output);
    write_summary(f, summary);
  }
  {
    auto f = open_out(config.output + ".calibration.txt");
    f << "seed " << seed << '\n'
      << "a_const " << format_double(summary.calibration.a_const) << '\n'
      << "c_const " << format_double(summary.calibration.c_const) << '\n'
      << "pilot_left_rate " << format_double(summary.calibration.left_rate) << '\n'
      << "pilot_right_rate " << format_double(summary.calibration.right_rate) << '\n'
      << "replications " << summary.replications << '\n'
      << "failures " << summary.failures << '\n';
  }
  return summary;
}

}  // namespace dtsel::io
