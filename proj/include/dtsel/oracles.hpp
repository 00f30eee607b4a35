#pragma once

// Brute-force reference implementations for tests. Nothing here shares code
// with the LAD solver or the rank estimator.

#include "dtsel/lad.hpp"
#include "dtsel/pairwise.hpp"

namespace dtsel::oracle {

struct GridBounds {
  double lower;
  double upper;
};

/// Exhaustive evaluation of loss() on a regular grid (p <= 2). Returns the
/// first grid point attaining the minimum, scanning coordinates in
/// lexicographic order from the lower corner. Throws GridTooLarge above 1e7
/// evaluations.
Vector grid_min_loss(const Dataset& data, const std::vector<GridBounds>& bounds, double step);

/// Best basic solution over all p-subsets of rows (m <= 200, p <= 3).
Vector lad_enumerate(const LinearSystem& system);

}  // namespace dtsel::oracle
