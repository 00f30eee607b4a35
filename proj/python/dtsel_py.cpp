#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtsel/adaptive_lasso.hpp"
#include "dtsel/io.hpp"
#include "dtsel/lad.hpp"
#include "dtsel/pairwise.hpp"
#include "dtsel/random_weighting.hpp"
#include "dtsel/rank_estimator.hpp"
#include "dtsel/simulation.hpp"
#include "dtsel/tuning.hpp"

namespace py = pybind11;
using namespace dtsel;

namespace {

EstimatorOptions estimator(double tol, int max_iter) {
  EstimatorOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  return o;
}

}  // namespace

PYBIND11_MODULE(_dtsel, m) {
  m.doc() = "Variable selection for doubly truncated linear regression";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] { return py::object(py::exception<Error>(m, "DtselError", PyExc_ValueError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args: (message, kind, index)
      PyErr_SetObject(error_type.get_stored().ptr(), py::make_tuple(e.what(), to_string(e.kind()), e.index()).ptr());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const Vector& y, const Vector& l, const Vector& r, const Matrix& x) {
             return Dataset::validate(y, l, r, x);
           }),
           py::arg("y"), py::arg("l"), py::arg("r"), py::arg("x"))
      .def_property_readonly("n", &Dataset::size)
      .def_property_readonly("p", &Dataset::dim)
      .def_property_readonly("y", &Dataset::y)
      .def_property_readonly("l", &Dataset::l)
      .def_property_readonly("r", &Dataset::r)
      .def_property_readonly("x", &Dataset::x)
      .def("shifted", &Dataset::shifted, py::arg("c"));

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("beta", &FitResult::beta)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_property_readonly("stop", [](const FitResult& f) { return std::string(to_string(f.stop)); })
      .def_readonly("active_set", &FitResult::active_set);

  py::class_<TraceEntry>(m, "TraceEntry")
      .def_readonly("lambda_", &TraceEntry::lambda)
      .def_readonly("bic", &TraceEntry::bic)
      .def_readonly("df", &TraceEntry::df)
      .def_readonly("loss", &TraceEntry::loss)
      .def_readonly("excluded", &TraceEntry::excluded)
      .def_readonly("reason", &TraceEntry::reason);

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_readonly("lambda_hat", &SelectionResult::lambda_hat)
      .def_readonly("fit", &SelectionResult::fit)
      .def_readonly("trace", &SelectionResult::trace);

  py::class_<AdaptiveWeights>(m, "AdaptiveWeights")
      .def_readonly("w", &AdaptiveWeights::w)
      .def_readonly("gamma", &AdaptiveWeights::gamma);

  py::class_<LambdaGrid>(m, "LambdaGrid")
      .def_readonly("values", &LambdaGrid::values)
      .def_readonly("lambda_max", &LambdaGrid::lambda_max);

  py::class_<ProposedFit>(m, "ProposedFit")
      .def_readonly("unpenalized", &ProposedFit::unpenalized)
      .def_readonly("weights", &ProposedFit::weights)
      .def_readonly("grid", &ProposedFit::grid)
      .def_readonly("selection", &ProposedFit::selection);

  py::class_<SeEstimate>(m, "SeEstimate")
      .def_readonly("active", &SeEstimate::active)
      .def_readonly("se", &SeEstimate::se)
      .def_readonly("se_mad", &SeEstimate::se_mad)
      .def_readonly("replicates", &SeEstimate::replicates)
      .def_readonly("failed", &SeEstimate::failed);

  py::class_<Calibration>(m, "Calibration")
      .def_readonly("a", &Calibration::a_const)
      .def_readonly("c", &Calibration::c_const)
      .def_readonly("left_rate", &Calibration::left_rate)
      .def_readonly("right_rate", &Calibration::right_rate);

  py::class_<MethodSummary>(m, "MethodSummary")
      .def_readonly("method", &MethodSummary::method)
      .def_readonly("me_median", &MethodSummary::me_median)
      .def_readonly("me_mad", &MethodSummary::me_mad)
      .def_readonly("cn", &MethodSummary::cn)
      .def_readonly("in_", &MethodSummary::in)
      .def_readonly("rcm", &MethodSummary::rcm);

  py::class_<StudySummary>(m, "StudySummary")
      .def_readonly("methods", &StudySummary::methods)
      .def_readonly("replications", &StudySummary::replications)
      .def_readonly("failures", &StudySummary::failures)
      .def_readonly("calibration", &StudySummary::calibration);

  m.def("read_csv", &io::read_csv, py::arg("path"));
  m.def("write_csv", py::overload_cast<const std::string&, const Dataset&>(&io::write_csv), py::arg("path"),
        py::arg("data"));

  m.def("loss", &loss, py::arg("data"), py::arg("beta"));
  m.def("weighted_loss", &weighted_loss, py::arg("data"), py::arg("beta"), py::arg("obs_weights"));
  m.def("score", &score, py::arg("data"), py::arg("beta"));
  m.def("comparable_pairs",
        [](const Dataset& d, const Vector& beta) {
          std::vector<std::pair<Index, Index>> out;
          for (const auto& pr : comparable_pairs(d, beta).pairs) out.emplace_back(pr.i, pr.j);
          return out;
        },
        py::arg("data"), py::arg("beta"));

  m.def("solve_lad",
        [](const Matrix& design, const Vector& response, std::optional<Vector> row_weights) {
          LinearSystem s{design, response, row_weights.value_or(Vector())};
          const LadResult r = solve_lad(s);
          return py::make_tuple(r.beta, r.objective);
        },
        py::arg("design"), py::arg("response"), py::arg("row_weights") = py::none(),
        "Weighted least absolute deviations; returns (beta, objective).");

  m.def("naive_lad", [](const Dataset& d) { return naive_lad(d); }, py::arg("data"));

  m.def("fit_unpenalized",
        [](const Dataset& d, double tol, int max_iter) { return fit_unpenalized(d, estimator(tol, max_iter)); },
        py::arg("data"), py::arg("tol") = 1e-6, py::arg("max_iter") = 50);

  m.def("adaptive_weights", &adaptive_weights, py::arg("beta_init"), py::arg("gamma") = 1.0,
        py::arg("cap") = 1e8);

  m.def("fit_adaptive_lasso",
        [](const Dataset& d, double lambda, const AdaptiveWeights& w, const Vector& start) {
          return fit_adaptive_lasso(d, lambda, w, start);
        },
        py::arg("data"), py::arg("lambda_"), py::arg("weights"), py::arg("start"));

  m.def("bic_multiplier", &bic_multiplier, py::arg("p"));

  m.def("fit_proposed",
        [](const Dataset& d, int grid_size, double gamma, double tol, int max_iter) {
          return fit_proposed(d, grid_size, gamma, estimator(tol, max_iter));
        },
        py::arg("data"), py::arg("grid_size") = 50, py::arg("gamma") = 1.0, py::arg("tol") = 1e-6,
        py::arg("max_iter") = 50);

  m.def("estimate_se",
        [](const Dataset& d, const ProposedFit& fit, int replicates, std::uint64_t seed, int workers) {
          SeOptions so;
          so.replicates = replicates;
          so.seed = seed;
          so.workers = workers;
          return estimate_se(d, fit.selection, fit.weights, fit.unpenalized.beta, so);
        },
        py::arg("data"), py::arg("fit"), py::arg("replicates") = 500, py::arg("seed") = 1,
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("simulate_observed",
        [](int n_tilde, const std::string& error_law, double truncation, Index n, std::uint64_t seed) {
          ScenarioSpec spec = study_scenario(n_tilde, parse_error_law(error_law), truncation);
          Rng pilot = make_stream(seed, 1ULL << 40);
          calibrate_truncation(spec, truncation, pilot);
          Rng rng = make_stream(seed, 0);
          return py::make_tuple(generate_observed(spec, rng, n), spec.beta0);
        },
        py::arg("n_tilde"), py::arg("error_law") = "normal", py::arg("truncation") = 0.3, py::arg("n") = 200,
        py::arg("seed") = 1, "Calibrated study scenario sample; returns (dataset, beta0).");

  m.def("run_study",
        [](int n_tilde, const std::string& error_law, double truncation, int replications, int grid_size,
           std::uint64_t seed, int workers) {
          StudyConfig cfg;
          cfg.scenario = study_scenario(n_tilde, parse_error_law(error_law), truncation);
          cfg.replications = replications;
          cfg.grid_size = grid_size;
          cfg.workers = workers;
          return run_study(cfg, seed);
        },
        py::arg("n_tilde") = 300, py::arg("error_law") = "normal", py::arg("truncation") = 0.3,
        py::arg("replications") = 200, py::arg("grid_size") = 50, py::arg("seed") = 1, py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());
}
