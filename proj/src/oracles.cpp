#include "dtsel/oracles.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace dtsel::oracle {
namespace {

// Gauss-Jordan with partial pivoting on a k x k system (k <= 3).
bool solve_small(std::array<std::array<double, 4>, 3> a, int k, std::array<double, 3>& x) {
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[piv], a[c]);
    for (int r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int cc = c; cc <= k; ++cc) a[r][cc] -= f * a[c][cc];
    }
  }
  for (int c = 0; c < k; ++c) x[c] = a[c][k] / a[c][c];
  return true;
}

double objective(const LinearSystem& s, const std::array<double, 3>& b, int p) {
  double total = 0.0;
  for (Index m = 0; m < s.rows(); ++m) {
    double fit = 0.0;
    for (int c = 0; c < p; ++c) fit += s.design(m, c) * b[c];
    total += s.weight(m) * std::abs(s.response[m] - fit);
  }
  return total;
}

}  // namespace

namespace {

struct Best {
  double value = std::numeric_limits<double>::infinity();
  std::array<double, 3> b{};
  bool found = false;
};

// Best basic solution using only the columns in `cols`; other coefficients are zero.
void enumerate_rows(const LinearSystem& system, const std::vector<int>& cols, Best& best) {
  const Index m = system.rows();
  const int p = static_cast<int>(system.cols());
  const int k = static_cast<int>(cols.size());
  std::array<Index, 3> idx{};
  auto visit = [&] {
    std::array<std::array<double, 4>, 3> a{};
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) a[r][c] = system.design(idx[r], cols[c]);
      a[r][k] = system.response[idx[r]];
    }
    std::array<double, 3> sub{};
    if (!solve_small(a, k, sub)) return;
    std::array<double, 3> b{};
    for (int c = 0; c < k; ++c) b[cols[c]] = sub[c];
    const double f = objective(system, b, p);
    // strict improvement beyond rounding keeps the first subset on ties
    if (!best.found || f < best.value - 1e-12 * std::max(1.0, std::abs(best.value))) {
      best.value = f;
      best.b = b;
      best.found = true;
    }
  };
  for (idx[0] = 0; idx[0] < m; ++idx[0]) {
    if (k == 1) { visit(); continue; }
    for (idx[1] = idx[0] + 1; idx[1] < m; ++idx[1]) {
      if (k == 2) { visit(); continue; }
      for (idx[2] = idx[1] + 1; idx[2] < m; ++idx[2]) visit();
    }
  }
}

}  // namespace

Vector lad_enumerate(const LinearSystem& system) {
  const Index m = system.rows();
  const int p = static_cast<int>(system.cols());
  if (m > 200 || p > 3 || p < 1) {
    throw Error(ErrorKind::GridTooLarge, "lad_enumerate supports m <= 200 and 1 <= p <= 3");
  }
  Best best;
  // Full column set first; a rank-deficient design falls back to the
  // lexicographically first column subsets of decreasing size.
  for (int k = p; k >= 1 && !best.found; --k) {
    std::vector<int> cols(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) cols[static_cast<std::size_t>(c)] = c;
    while (true) {
      enumerate_rows(system, cols, best);
      int i = k - 1;
      while (i >= 0 && cols[static_cast<std::size_t>(i)] == p - k + i) --i;
      if (i < 0) break;
      ++cols[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) cols[static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (!best.found) throw Error(ErrorKind::RankDeficient, "design has no nonzero entry");
  Vector out(p);
  for (int c = 0; c < p; ++c) out[c] = best.b[c];
  return out;
}

Vector grid_min_loss(const Dataset& data, const std::vector<GridBounds>& bounds, double step) {
  const auto p = static_cast<Index>(bounds.size());
  if (p != data.dim() || p < 1 || p > 2) {
    throw Error(ErrorKind::DimensionMismatch, "grid_min_loss needs one bound per coefficient, p <= 2");
  }
  if (!(step > 0.0)) throw Error(ErrorKind::Config, "grid step must be positive");
  std::vector<long> counts;
  double total = 1.0;
  for (const auto& b : bounds) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.upper < b.lower) {
      throw Error(ErrorKind::Config, "grid bounds must be finite and ordered");
    }
    counts.push_back(static_cast<long>(std::floor((b.upper - b.lower) / step + 1e-9)) + 1);
    total *= static_cast<double>(counts.back());
  }
  if (total > 1e7) throw Error(ErrorKind::GridTooLarge, "more than 1e7 grid evaluations");

  Vector beta(p), best_beta(p);
  double best = std::numeric_limits<double>::infinity();
  const long outer = counts[0];
  const long inner = p == 2 ? counts[1] : 1;
  for (long a = 0; a < outer; ++a) {
    beta[0] = bounds[0].lower + static_cast<double>(a) * step;
    for (long b = 0; b < inner; ++b) {
      if (p == 2) beta[1] = bounds[1].lower + static_cast<double>(b) * step;
      const double f = loss(data, beta);
      if (f < best) {
        best = f;
        best_beta = beta;
      }
    }
  }
  return best_beta;
}

}  // namespace dtsel::oracle
