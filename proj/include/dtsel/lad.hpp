#pragma once

#include <optional>
#include <vector>

#include "dtsel/data.hpp"

namespace dtsel {

/// Weighted least-absolute-deviation problem
///   minimise  sum_m w_m |response_m - design_m' beta|.
struct LinearSystem {
  Matrix design;
  Vector response;
  Vector row_weights;  // empty means all ones

  Index rows() const noexcept { return design.rows(); }
  Index cols() const noexcept { return design.cols(); }
  double weight(Index m) const { return row_weights.size() == 0 ? 1.0 : row_weights[m]; }
};

struct LadOptions {
  /// Starting point for the initial basis; least squares when absent.
  std::optional<Vector> warm_start;
  /// Dual feasibility tolerance on |u_k| <= 1.
  double optimality_tol = 1e-10;
  /// Relative size of the anti-degeneracy perturbation of the responses.
  double perturbation = 1e-9;
  Index max_pivots = 0;  // 0 selects a bound from the problem size
};

struct LadResult {
  Vector beta;
  double objective = 0.0;
  Index pivots = 0;
  /// Rows interpolated exactly by beta, ascending.
  std::vector<Index> basis;
};

double weighted_l1(const LinearSystem& system, const Vector& beta);

/// Exact L1 regression by simplex edge descent over basic solutions.
///
/// Each vertex interpolates p rows. At a vertex the directional derivative
/// along the edge that releases basic row k is 1 - |u_k| with
/// u = B^{-T} sum_{nonbasic} sign(r_i) x_i (rows pre-scaled by their weight);
/// the vertex is optimal once |u_k| <= 1 for all k. Otherwise the edge with the
/// largest |u_k| is followed to the breakpoint where the slope turns
/// non-negative, which is a weighted median search over the ratios r_i / z_i.
///
/// Responses are shifted by a fixed pseudo-random amount of relative size
/// `perturbation` while pivoting, which removes the ties that pairwise
/// difference designs produce (rows (i,j), (j,k) basic force (i,k) onto zero
/// residual). The final coefficients are re-solved from the optimal basis with
/// the exact responses, so the output is a basic solution of the original
/// problem and depends only on the input.
///
/// Throws Degenerate when every weight is zero and RankDeficient when the rows
/// with positive weight do not span R^p.
LadResult solve_lad(const LinearSystem& system, const LadOptions& opts = {});

}  // namespace dtsel
