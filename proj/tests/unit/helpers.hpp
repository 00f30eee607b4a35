#pragma once

#include <cmath>
#include <initializer_list>
#include <random>

#include "dtsel/simulation.hpp"

namespace dtsel::test {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

inline Observation obs(double y, double l, double r, std::initializer_list<double> x = {0.0}) {
  return {y, l, r, vec(x)};
}

/// Windows of random width around each response; covariates standard normal.
inline Dataset random_dataset(Rng& rng, Index n, Index p, double width = 2.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<Observation> rows;
  for (Index i = 0; i < n; ++i) {
    Observation o;
    o.x = Vector(p);
    for (Index j = 0; j < p; ++j) o.x[j] = z(rng);
    o.y = o.x.sum() + z(rng);
    o.l = o.y - width * u(rng);
    o.r = o.y + width * u(rng);
    rows.push_back(o);
  }
  return Dataset::validate(rows, p);
}

/// Truncated sample from a Gaussian design with the given coefficients.
inline Dataset truncated_sample(const Vector& beta0, Index n, std::uint64_t seed, double target = 0.3) {
  ScenarioSpec spec = gaussian_scenario(200, beta0, ErrorLaw::Normal, target);
  Rng cal = make_stream(seed, 1ull << 40);
  calibrate_truncation(spec, target, cal, 20000);
  Rng rng = make_stream(seed, 0);
  return generate_observed(spec, rng, n);
}

/// Responses, windows and covariates on a dyadic grid so that integer shifts are exact.
inline Dataset dyadic(const Dataset& d) {
  auto snap = [](double v) { return std::ldexp(std::round(std::ldexp(v, 16)), -16); };
  Vector y = d.y().unaryExpr(snap), l = d.l().unaryExpr(snap), r = d.r().unaryExpr(snap);
  Matrix x = d.x().unaryExpr(snap);
  for (Index i = 0; i < y.size(); ++i) {
    if (!(l[i] < y[i])) l[i] = y[i] - 1.0 / 1024;
    if (!(y[i] < r[i])) r[i] = y[i] + 1.0 / 1024;
  }
  return Dataset::validate(y, l, r, x);
}

}  // namespace dtsel::test
