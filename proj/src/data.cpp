#include "dtsel/data.hpp"

#include <cmath>
#include <string>

namespace dtsel {
namespace {

void check_record(Index i, double y, double l, double r, const auto& x) {
  const long idx = static_cast<long>(i);
  if (!std::isfinite(y)) throw Error(ErrorKind::NonFinite, "y of observation " + std::to_string(i), idx);
  if (!std::isfinite(l)) throw Error(ErrorKind::NonFinite, "l of observation " + std::to_string(i), idx);
  if (!std::isfinite(r)) throw Error(ErrorKind::NonFinite, "r of observation " + std::to_string(i), idx);
  for (Index j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw Error(ErrorKind::NonFinite,
                  "x" + std::to_string(j + 1) + " of observation " + std::to_string(i), idx);
    }
  }
  if (!(l < y) || !(y < r)) {
    throw Error(ErrorKind::WindowViolation,
                "observation " + std::to_string(i) + " needs l < y < r", idx);
  }
}

}  // namespace

Dataset Dataset::validate(const std::vector<Observation>& records, Index p) {
  if (p <= 0) throw Error(ErrorKind::DimensionMismatch, "covariate dimension must be positive");
  const auto n = static_cast<Index>(records.size());
  Dataset d;
  d.y_.resize(n);
  d.l_.resize(n);
  d.r_.resize(n);
  d.x_.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    const auto& o = records[static_cast<std::size_t>(i)];
    if (o.x.size() != p) {
      throw Error(ErrorKind::DimensionMismatch,
                  "observation " + std::to_string(i) + " has " + std::to_string(o.x.size()) +
                      " covariates, expected " + std::to_string(p),
                  static_cast<long>(i));
    }
    check_record(i, o.y, o.l, o.r, o.x);
    d.y_[i] = o.y;
    d.l_[i] = o.l;
    d.r_[i] = o.r;
    d.x_.row(i) = o.x.transpose();
  }
  return d;
}

Dataset Dataset::validate(const Vector& y, const Vector& l, const Vector& r, const Matrix& x) {
  const Index n = y.size();
  if (l.size() != n || r.size() != n || x.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "y, l, r and x must have the same number of rows");
  }
  if (x.cols() <= 0) throw Error(ErrorKind::DimensionMismatch, "covariate dimension must be positive");
  for (Index i = 0; i < n; ++i) check_record(i, y[i], l[i], r[i], x.row(i));
  Dataset d;
  d.y_ = y;
  d.l_ = l;
  d.r_ = r;
  d.x_ = x;
  return d;
}

Observation Dataset::observation(Index i) const {
  return Observation{y_[i], l_[i], r_[i], x_.row(i).transpose()};
}

Dataset Dataset::rows(std::span<const Index> idx) const {
  Dataset d;
  const auto m = static_cast<Index>(idx.size());
  d.y_.resize(m);
  d.l_.resize(m);
  d.r_.resize(m);
  d.x_.resize(m, dim());
  for (Index k = 0; k < m; ++k) {
    const Index i = idx[static_cast<std::size_t>(k)];
    d.y_[k] = y_[i];
    d.l_[k] = l_[i];
    d.r_[k] = r_[i];
    d.x_.row(k) = x_.row(i);
  }
  return d;
}

Dataset Dataset::columns(std::span<const Index> cols) const {
  Dataset d;
  d.y_ = y_;
  d.l_ = l_;
  d.r_ = r_;
  d.x_.resize(size(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) d.x_.col(static_cast<Index>(k)) = x_.col(cols[k]);
  return d;
}

Dataset Dataset::shifted(double c) const {
  Dataset d = *this;
  d.y_.array() += c;
  d.l_.array() += c;
  d.r_.array() += c;
  return d;
}

void require_pairs(const Dataset& data) {
  if (data.size() < 2) {
    throw Error(ErrorKind::TooFewObservations, "pairwise estimation needs at least two observations");
  }
}

double residual(const Observation& obs, const Vector& beta) {
  if (obs.x.size() != beta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient length does not match covariates");
  }
  return obs.y - obs.x.dot(beta);
}

Vector residuals(const Dataset& data, const Vector& beta) {
  if (data.dim() != beta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient length does not match covariates");
  }
  return data.y() - data.x() * beta;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::PairSetFixedPoint: return "pair-set-fixed-point";
    case StopReason::CoefficientTolerance: return "coefficient-tolerance";
    case StopReason::Cycle: return "cycle";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::LineSearch: return "line-search";
  }
  return "unknown";
}

std::vector<Index> support_of(const Vector& beta) {
  std::vector<Index> s;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(j);
  }
  return s;
}

void threshold_zeros(Vector& beta, double zero_tol) {
  const double scale = std::max(1.0, beta.size() ? beta.cwiseAbs().maxCoeff() : 0.0);
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta[j]) < zero_tol * scale) beta[j] = 0.0;
  }
}

}  // namespace dtsel
