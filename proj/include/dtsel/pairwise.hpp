#pragma once

#include <compare>
#include <vector>

#include "dtsel/data.hpp"

namespace dtsel {

/// Admissible range of e_i - e_j for a pair; independent of beta.
struct ClampBounds {
  double lower;  // max(L_j - Y_j, Y_i - R_i) < 0
  double upper;  // min(R_j - Y_j, Y_i - L_i) > 0
};

struct IndexPair {
  Index i;
  Index j;
  auto operator<=>(const IndexPair&) const = default;
};

/// Unordered comparable pairs, i < j, in lexicographic order.
struct PairSet {
  std::vector<IndexPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
  std::uint64_t hash() const noexcept;
  bool operator==(const PairSet&) const = default;
};

ClampBounds clamp_bounds(const Observation& obs_i, const Observation& obs_j);

/// h_ij(beta): absolute value of e_i - e_j clamped into the pair's bounds.
double pair_kernel(const Observation& obs_i, const Observation& obs_j, const Vector& beta);

/// Both residuals lie inside the other record's shifted window (strict).
bool is_comparable(const Observation& obs_i, const Observation& obs_j, const Vector& beta);

/// xi_ij(beta) = I{comparable} (x_i - x_j) sgn(e_i - e_j), with sgn(0) = 0.
Vector pair_score(const Observation& obs_i, const Observation& obs_j, const Vector& beta);

// Aggregates below are normalised by n(n-1) and sum over ordered pairs i != j.

double loss(const Dataset& data, const Vector& beta);

/// sum_{i != j} (W_i + W_j) h_ij(beta) / (n(n-1)); equals loss() when W = 0.5.
double weighted_loss(const Dataset& data, const Vector& beta, const Vector& obs_weights);

Vector score(const Dataset& data, const Vector& beta);

PairSet comparable_pairs(const Dataset& data, const Vector& beta);

/// sum over `pairs` of |e_i - e_j| with the same normalisation as loss(); the
/// objective the fixed-indicator iteration minimises for a frozen pair set.
double indicator_loss(const Dataset& data, const PairSet& pairs, const Vector& beta);

}  // namespace dtsel
