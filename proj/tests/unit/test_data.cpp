#include <doctest.h>

#include "helpers.hpp"

using namespace dtsel;
using test::obs;
using test::vec;

TEST_CASE("validate accepts a window that strictly contains y") {
  const Dataset d = Dataset::validate({obs(2, 0, 3, {1})}, 1);
  CHECK(d.size() == 1);
  CHECK(d.dim() == 1);
  CHECK(d.y()[0] == 2.0);
}

TEST_CASE("validate rejects boundary equality") {
  try {
    Dataset::validate({obs(1, 0, 5, {0}), obs(2, 2, 3, {1})}, 1);
    FAIL("expected WindowViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowViolation);
    CHECK(e.index() == 1);
  }
  CHECK_THROWS_AS(Dataset::validate({obs(3, 0, 3, {1})}, 1), Error);
}

TEST_CASE("validate rejects a covariate vector of the wrong length") {
  try {
    Dataset::validate({obs(2, 0, 3, {1, 2})}, 1);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("validate rejects non-finite values") {
  const double inf = std::numeric_limits<double>::infinity();
  try {
    Dataset::validate({obs(2, 0, 3, {1}), obs(2, -inf, 3, {1})}, 1);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
    CHECK(e.index() == 1);
  }
}

TEST_CASE("residual examples") {
  CHECK(residual(obs(2, 0, 3, {1}), vec({0})) == 2.0);
  CHECK(residual(obs(2, 0, 3, {1}), vec({2})) == 0.0);
  CHECK(residual(obs(5, 0, 9, {1, 2}), vec({1, 1})) == 2.0);
}

TEST_CASE("residual at zero is y and residual is affine in beta") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 1000; ++t) {
    Observation o{u(rng), -10, 10, vec({u(rng), u(rng), u(rng)})};
    o.l = o.y - 1;
    o.r = o.y + 1;
    const Vector b1 = vec({u(rng), u(rng), u(rng)});
    const Vector b2 = vec({u(rng), u(rng), u(rng)});
    CHECK(residual(o, Vector::Zero(3)) == o.y);
    CHECK(residual(o, b1 + b2) ==
          doctest::Approx(residual(o, b1) + residual(o, b2) - o.y).epsilon(1e-14).scale(10));
  }
}

TEST_CASE("subsets and shifts") {
  Rng rng(1);
  const Dataset d = test::random_dataset(rng, 6, 3);
  const std::vector<Index> rows{4, 1};
  const Dataset r = d.rows(rows);
  CHECK(r.size() == 2);
  CHECK(r.y()[0] == d.y()[4]);
  CHECK(r.x()(1, 2) == d.x()(1, 2));
  const std::vector<Index> cols{2};
  const Dataset c = d.columns(cols);
  CHECK(c.dim() == 1);
  CHECK(c.x()(3, 0) == d.x()(3, 2));
  const Dataset s = d.shifted(2.5);
  CHECK(s.l()[0] == d.l()[0] + 2.5);
  CHECK_THROWS_AS(require_pairs(d.rows(std::vector<Index>{0})), Error);
}

TEST_CASE("threshold_zeros is relative to the largest coefficient") {
  Vector b = vec({1e-7, 100, 5e-5, -2e-4});
  threshold_zeros(b, 1e-6);
  CHECK(b[0] == 0.0);
  CHECK(b[2] == 0.0);
  CHECK(b[3] == -2e-4);
  CHECK(support_of(b) == std::vector<Index>{1, 3});
}

TEST_CASE("exit codes by error class") {
  CHECK(exit_code(ErrorKind::Config) == 1);
  CHECK(exit_code(ErrorKind::WindowViolation) == 2);
  CHECK(exit_code(ErrorKind::Parse) == 2);
  CHECK(exit_code(ErrorKind::RankDeficient) == 3);
}
