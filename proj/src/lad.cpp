#include "dtsel/lad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace dtsel {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Fixed value in [-1, 1) attached to a row index.
double jitter(Index row) {
  const auto h = splitmix64(static_cast<std::uint64_t>(row));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_system(const LinearSystem& s) {
  if (s.response.size() != s.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "response length must equal design rows");
  }
  if (s.row_weights.size() != 0 && s.row_weights.size() != s.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "row weight length must equal design rows");
  }
  if (s.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "design needs at least one column");
  for (Index m = 0; m < s.row_weights.size(); ++m) {
    if (!std::isfinite(s.row_weights[m]) || s.row_weights[m] < 0.0) {
      throw Error(ErrorKind::NonFinite, "row weights must be finite and non-negative", static_cast<long>(m));
    }
  }
  if (!s.design.allFinite() || !s.response.allFinite()) {
    throw Error(ErrorKind::NonFinite, "design and response must be finite");
  }
}

// p rows that are linearly independent, preferring small |r|.
std::vector<Index> initial_basis(const Matrix& X, const Vector& r) {
  const Index m = X.rows();
  const Index p = X.cols();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  auto closer = [&r](Index a, Index b) {
    const double ra = std::abs(r[a]), rb = std::abs(r[b]);
    return ra < rb || (ra == rb && a < b);
  };
  const auto head = std::min<Index>(m, 4 * p + 8);
  std::partial_sort(order.begin(), order.begin() + head, order.end(), closer);

  std::vector<Index> basis;
  std::vector<char> taken(static_cast<std::size_t>(m), 0);
  Matrix Q(p, p);
  for (double threshold : {1e-6, 1e-12}) {
    for (std::size_t pos = 0; pos < order.size() && static_cast<Index>(basis.size()) < p; ++pos) {
      if (pos == static_cast<std::size_t>(head) && head < m) {
        std::sort(order.begin() + head, order.end(), closer);
      }
      const Index i = order[pos];
      if (taken[static_cast<std::size_t>(i)]) continue;
      Vector v = X.row(i).transpose();
      const double norm = v.norm();
      if (norm == 0.0) continue;
      const auto k = static_cast<Index>(basis.size());
      for (int pass = 0; pass < 2; ++pass) {
        for (Index t = 0; t < k; ++t) v -= Q.col(t).dot(v) * Q.col(t);
      }
      const double rest = v.norm();
      if (rest > threshold * norm) {
        Q.col(k) = v / rest;
        basis.push_back(i);
        taken[static_cast<std::size_t>(i)] = 1;
      }
    }
    if (static_cast<Index>(basis.size()) == p) break;
  }
  if (static_cast<Index>(basis.size()) < p) {
    throw Error(ErrorKind::RankDeficient, "rows with positive weight span only " +
                                              std::to_string(basis.size()) + " of " +
                                              std::to_string(p) + " dimensions");
  }
  return basis;
}

struct HeapEntry {
  double t;
  Index row;
  bool operator>(const HeapEntry& o) const { return t > o.t || (t == o.t && row > o.row); }
};

}  // namespace

double weighted_l1(const LinearSystem& system, const Vector& beta) {
  const Vector res = system.response - system.design * beta;
  if (system.row_weights.size() == 0) return res.cwiseAbs().sum();
  return system.row_weights.dot(res.cwiseAbs());
}

LadResult solve_lad(const LinearSystem& system, const LadOptions& opts) {
  check_system(system);
  const Index p = system.cols();

  // Rows with zero weight or an all-zero design row do not move the optimum.
  std::vector<Index> origin;
  bool any_weight = false;
  for (Index m = 0; m < system.rows(); ++m) {
    if (system.weight(m) <= 0.0) continue;
    any_weight = true;
    if (system.design.row(m).cwiseAbs().maxCoeff() > 0.0) origin.push_back(m);
  }
  if (!any_weight) throw Error(ErrorKind::Degenerate, "all row weights are zero");
  const auto m = static_cast<Index>(origin.size());
  if (m < p) {
    throw Error(ErrorKind::RankDeficient, std::to_string(m) + " informative rows for " +
                                              std::to_string(p) + " coefficients");
  }

  Matrix X(m, p);
  Vector y(m);
  for (Index k = 0; k < m; ++k) {
    const Index src = origin[static_cast<std::size_t>(k)];
    const double w = system.weight(src);
    X.row(k) = w * system.design.row(src);
    y[k] = w * system.response[src];
  }

  const double scale = y.cwiseAbs().maxCoeff();
  Vector yp = y;
  if (scale > 0.0 && opts.perturbation > 0.0) {
    for (Index k = 0; k < m; ++k) {
      yp[k] += opts.perturbation * scale * jitter(origin[static_cast<std::size_t>(k)]);
    }
  }

  Vector beta;
  if (opts.warm_start) {
    if (opts.warm_start->size() != p) {
      throw Error(ErrorKind::DimensionMismatch, "warm start length must equal design columns");
    }
    beta = *opts.warm_start;
  } else {
    Eigen::LDLT<Matrix> normal(X.transpose() * X);
    beta = normal.solve(X.transpose() * yp);
    if (normal.info() != Eigen::Success || !beta.allFinite()) beta = Vector::Zero(p);
  }

  Vector r = yp - X * beta;
  std::vector<Index> basis = initial_basis(X, r);
  std::vector<Index> slot(static_cast<std::size_t>(m), -1);  // basis position or -1

  Matrix Binv(p, p);
  Vector sgn(m);
  Vector g(p);
  auto refactor = [&] {
    Matrix B(p, p);
    Vector yb(p);
    for (Index k = 0; k < p; ++k) {
      B.row(k) = X.row(basis[static_cast<std::size_t>(k)]);
      yb[k] = yp[basis[static_cast<std::size_t>(k)]];
    }
    Eigen::PartialPivLU<Matrix> lu(B);
    Binv = lu.inverse();
    if (!Binv.allFinite()) throw Error(ErrorKind::NumericalFailure, "singular simplex basis");
    beta = Binv * yb;
    r.noalias() = yp - X * beta;
    std::fill(slot.begin(), slot.end(), -1);
    for (Index k = 0; k < p; ++k) {
      const Index i = basis[static_cast<std::size_t>(k)];
      slot[static_cast<std::size_t>(i)] = k;
      r[i] = 0.0;
    }
    for (Index i = 0; i < m; ++i) sgn[i] = slot[static_cast<std::size_t>(i)] >= 0 ? 0.0 : sign(r[i]);
    g.noalias() = X.transpose() * sgn;
  };
  refactor();

  const Index max_pivots = opts.max_pivots > 0 ? opts.max_pivots : 10 * (m + p) + 1000;
  Index pivots = 0;
  Vector u(p), z(m), d(p), v(p);
  std::vector<char> blocked(static_cast<std::size_t>(p), 0);
  std::vector<HeapEntry> heap;
  std::vector<Index> crossed;
  heap.reserve(static_cast<std::size_t>(m));

  while (true) {
    u.noalias() = Binv.transpose() * g;
    Index k = -1;
    double best = 1.0 + opts.optimality_tol;
    for (Index j = 0; j < p; ++j) {
      if (!blocked[static_cast<std::size_t>(j)] && std::abs(u[j]) > best) {
        best = std::abs(u[j]);
        k = j;
      }
    }
    if (k < 0) break;

    // Edge that releases basic row k, oriented downhill.
    const double s = sign(u[k]);
    d = Binv.col(k);
    z.noalias() = X * d;
    z *= s;

    double deficit = std::abs(u[k]) - 1.0;
    heap.clear();
    for (Index i = 0; i < m; ++i) {
      if (slot[static_cast<std::size_t>(i)] >= 0) continue;
      const double zi = z[i];
      if (zi == 0.0) continue;
      const double ri = r[i];
      if (ri == 0.0) {
        deficit -= std::abs(zi);
      } else if ((ri > 0.0) == (zi > 0.0)) {
        heap.push_back({ri / zi, i});
      }
    }
    if (deficit <= 0.0) {
      blocked[static_cast<std::size_t>(k)] = 1;
      continue;
    }

    // Weighted median line search: slope rises by 2|z_i| at each breakpoint.
    std::make_heap(heap.begin(), heap.end(), std::greater<>{});
    crossed.clear();
    Index q = -1;
    double step = 0.0;
    double climb = 0.0;
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
      const HeapEntry e = heap.back();
      heap.pop_back();
      climb += 2.0 * std::abs(z[e.row]);
      if (climb >= deficit) {
        q = e.row;
        step = e.t;
        break;
      }
      crossed.push_back(e.row);
    }
    if (q < 0) throw Error(ErrorKind::NumericalFailure, "unbounded L1 descent direction");

    const Index leaving = basis[static_cast<std::size_t>(k)];
    beta += (step * s) * d;
    r.noalias() -= step * z;
    for (Index i : crossed) {
      g -= (2.0 * sgn[i]) * X.row(i).transpose();
      sgn[i] = -sgn[i];
    }
    g -= sgn[q] * X.row(q).transpose();
    sgn[q] = 0.0;
    r[q] = 0.0;
    slot[static_cast<std::size_t>(leaving)] = -1;
    sgn[leaving] = -s;
    g += sgn[leaving] * X.row(leaving).transpose();

    // Replace row k of B by x_q: column k of B^{-1} is rescaled, the others
    // eliminated against it.
    v.noalias() = Binv.transpose() * X.row(q).transpose();
    const double alpha = v[k];
    Binv.col(k) /= alpha;
    for (Index j = 0; j < p; ++j) {
      if (j != k) Binv.col(j) -= v[j] * Binv.col(k);
    }
    basis[static_cast<std::size_t>(k)] = q;
    slot[static_cast<std::size_t>(q)] = k;
    std::fill(blocked.begin(), blocked.end(), 0);

    if (++pivots > max_pivots) throw Error(ErrorKind::NumericalFailure, "simplex pivot limit reached");
    if (pivots % 64 == 0) refactor();
  }

  // Exact basic solution of the unperturbed problem on the optimal basis.
  std::sort(basis.begin(), basis.end());
  Matrix B(p, p);
  Vector yb(p);
  for (Index k = 0; k < p; ++k) {
    B.row(k) = X.row(basis[static_cast<std::size_t>(k)]);
    yb[k] = y[basis[static_cast<std::size_t>(k)]];
  }
  LadResult out;
  out.beta = Eigen::PartialPivLU<Matrix>(B).solve(yb);
  if (!out.beta.allFinite()) throw Error(ErrorKind::NumericalFailure, "non-finite LAD solution");
  out.objective = weighted_l1(system, out.beta);
  out.pivots = pivots;
  for (Index i : basis) out.basis.push_back(origin[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace dtsel
