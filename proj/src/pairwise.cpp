#include "dtsel/pairwise.hpp"

#include <algorithm>
#include <cmath>

namespace dtsel {
namespace {

void check_dims(const Observation& a, const Observation& b, const Vector& beta) {
  if (a.x.size() != beta.size() || b.x.size() != beta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient length does not match covariates");
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Per-observation offsets a_i = L_i - Y_i < 0 and b_i = R_i - Y_i > 0, so that
// lower_ij = max(a_j, -b_i) and upper_ij = min(b_j, -a_i).
struct Offsets {
  Vector below, above;
  explicit Offsets(const Dataset& d) : below(d.l() - d.y()), above(d.r() - d.y()) {}
  double lower(Index i, Index j) const { return std::max(below[j], -above[i]); }
  double upper(Index i, Index j) const { return std::min(above[j], -below[i]); }
};

// Residuals measured from the first response; pairwise differences are
// unchanged and a common shift of the data cancels before any rounding.
Vector centred_residuals(const Dataset& d, const Vector& beta) {
  if (beta.size() != d.dim()) throw Error(ErrorKind::DimensionMismatch, "beta length must equal covariate dimension");
  return (d.y().array() - d.y()[0]).matrix() - d.x() * beta;
}

double normaliser(const Dataset& d) {
  const double n = static_cast<double>(d.size());
  return 1.0 / (n * (n - 1.0));
}

}  // namespace

std::uint64_t PairSet::hash() const noexcept {
  // FNV-1a over the index stream
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(pairs.size());
  for (const auto& p : pairs) {
    mix(static_cast<std::uint64_t>(p.i));
    mix(static_cast<std::uint64_t>(p.j));
  }
  return h;
}

ClampBounds clamp_bounds(const Observation& oi, const Observation& oj) {
  return {std::max(oj.l - oj.y, oi.y - oi.r), std::min(oj.r - oj.y, oi.y - oi.l)};
}

double pair_kernel(const Observation& oi, const Observation& oj, const Vector& beta) {
  check_dims(oi, oj, beta);
  const auto [lo, hi] = clamp_bounds(oi, oj);
  const double d = residual(oi, beta) - residual(oj, beta);
  return std::abs(std::clamp(d, lo, hi));
}

bool is_comparable(const Observation& oi, const Observation& oj, const Vector& beta) {
  check_dims(oi, oj, beta);
  const double ei = residual(oi, beta);
  const double ej = residual(oj, beta);
  const double xbi = oi.x.dot(beta);
  const double xbj = oj.x.dot(beta);
  return oj.l - xbj < ei && ei < oj.r - xbj && oi.l - xbi < ej && ej < oi.r - xbi;
}

Vector pair_score(const Observation& oi, const Observation& oj, const Vector& beta) {
  check_dims(oi, oj, beta);
  if (!is_comparable(oi, oj, beta)) return Vector::Zero(beta.size());
  return (oi.x - oj.x) * sign(residual(oi, beta) - residual(oj, beta));
}

double loss(const Dataset& data, const Vector& beta) {
  require_pairs(data);
  const Vector e = centred_residuals(data, beta);
  const Offsets off(data);
  const Index n = data.size();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      row += std::abs(std::clamp(e[i] - e[j], off.lower(i, j), off.upper(i, j)));
    }
    total += row;
  }
  return 2.0 * total * normaliser(data);
}

double weighted_loss(const Dataset& data, const Vector& beta, const Vector& W) {
  require_pairs(data);
  if (W.size() != data.size()) throw Error(ErrorKind::DimensionMismatch, "one weight per observation");
  const Vector e = centred_residuals(data, beta);
  const Offsets off(data);
  const Index n = data.size();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      row += (W[i] + W[j]) * std::abs(std::clamp(e[i] - e[j], off.lower(i, j), off.upper(i, j)));
    }
    total += row;
  }
  return 2.0 * total * normaliser(data);
}

Vector score(const Dataset& data, const Vector& beta) {
  require_pairs(data);
  const Vector e = centred_residuals(data, beta);
  const Offsets off(data);
  const Index n = data.size();
  Vector s = Vector::Zero(data.dim());
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = e[i] - e[j];
      if (off.lower(i, j) < d && d < off.upper(i, j) && d != 0.0) {
        s += sign(d) * (data.x().row(i) - data.x().row(j)).transpose();
      }
    }
  }
  return 2.0 * normaliser(data) * s;
}

PairSet comparable_pairs(const Dataset& data, const Vector& beta) {
  require_pairs(data);
  const Vector e = centred_residuals(data, beta);
  const Offsets off(data);
  const Index n = data.size();
  PairSet set;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = e[i] - e[j];
      if (off.lower(i, j) < d && d < off.upper(i, j)) set.pairs.push_back({i, j});
    }
  }
  return set;
}

double indicator_loss(const Dataset& data, const PairSet& pairs, const Vector& beta) {
  require_pairs(data);
  const Vector e = centred_residuals(data, beta);
  double total = 0.0;
  for (const auto& [i, j] : pairs.pairs) total += std::abs(e[i] - e[j]);
  return 2.0 * total * normaliser(data);
}

}  // namespace dtsel
