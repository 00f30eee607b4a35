#include <doctest.h>

#include "helpers.hpp"

using namespace dtsel;
using test::vec;

namespace {

struct Fitted {
  Dataset data;
  ProposedFit fit;
};

const Fitted& fitted() {
  static const Fitted f = [] {
    Dataset d = test::truncated_sample(vec({1.5, -1.0, 0.0, 0.8}), 90, 31);
    ProposedFit pf = fit_proposed(d, 15);
    return Fitted{std::move(d), std::move(pf)};
  }();
  return f;
}

}  // namespace

TEST_CASE("weight law moments") {
  const PerturbationLaw law;
  CHECK(law.mean() == 0.5);
  CHECK(law.variance() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(law.bound() == 2.5);
  Rng rng = make_stream(4, 0);
  const Vector w = draw_weights(200000, rng);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= 2.5);
  CHECK(w.mean() == doctest::Approx(0.5).epsilon(0.02));
  const double var = (w.array() - w.mean()).square().mean();
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("weights replay under a fixed seed") {
  Rng a = make_stream(9, 3), b = make_stream(9, 3), c = make_stream(9, 4);
  const Vector wa = draw_weights(50, a);
  CHECK(wa == draw_weights(50, b));
  CHECK_FALSE(wa == draw_weights(50, c));
}

TEST_CASE("expectation-level weights reproduce the fit exactly") {
  const auto& [d, pf] = fitted();
  const Vector half = Vector::Constant(d.size(), 0.5);
  const Vector star = perturbed_fit(d, half, pf.selection.lambda_hat, pf.weights, pf.unpenalized.beta);
  CHECK(star == pf.selection.fit.beta);
  CHECK(weighted_loss(d, pf.unpenalized.beta, half) == loss(d, pf.unpenalized.beta));
}

TEST_CASE("a dominant observation drives the perturbed objective") {
  const auto& [d, pf] = fitted();
  Vector W = Vector::Constant(d.size(), 1e-3);
  W[0] = 1e3;
  const Vector star = perturbed_fit(d, W, pf.selection.lambda_hat, pf.weights, pf.unpenalized.beta);
  // objective decomposition: pairs involving record 0 carry almost all weight
  Vector only = Vector::Zero(d.size());
  only[0] = 1.0;
  const double dominated = weighted_loss(d, star, only);
  const double at_fit = weighted_loss(d, pf.selection.fit.beta, only);
  CHECK(dominated <= at_fit + 1e-12);
  CHECK_THROWS_AS(perturbed_fit(d, Vector::Zero(d.size()), 0.1, pf.weights, pf.unpenalized.beta), Error);
}

TEST_CASE("standard errors: reproducible, order invariant, degenerate law") {
  const auto& [d, pf] = fitted();
  SeOptions o;
  o.replicates = 40;
  o.seed = 5;
  const SeEstimate a = estimate_se(d, pf.selection, pf.weights, pf.unpenalized.beta, o);
  const SeEstimate b = estimate_se(d, pf.selection, pf.weights, pf.unpenalized.beta, o);
  CHECK(a.replicates == b.replicates);
  CHECK(a.se == b.se);
  CHECK(a.active == pf.selection.fit.active_set);
  CHECK((a.se.array() > 0.0).all());
  CHECK((a.se_mad.array() >= 0.0).all());

  // reversing the replicate order changes nothing beyond rounding
  const Matrix rev = a.replicates.colwise().reverse();
  for (Index k = 0; k < rev.cols(); ++k) {
    const double m = rev.col(k).mean();
    const double sd = std::sqrt((rev.col(k).array() - m).square().sum() / double(rev.rows() - 1));
    CHECK(sd == doctest::Approx(a.se[k]).epsilon(1e-12));
  }

  o.workers = 3;
  CHECK(estimate_se(d, pf.selection, pf.weights, pf.unpenalized.beta, o).replicates == a.replicates);

  SeOptions flat = o;
  flat.law = PerturbationLaw{0.5, 1.0};
  flat.replicates = 5;
  const SeEstimate z = estimate_se(d, pf.selection, pf.weights, pf.unpenalized.beta, flat);
  CHECK(z.se.isZero(0));
  CHECK(z.se_mad.isZero(0));
}
