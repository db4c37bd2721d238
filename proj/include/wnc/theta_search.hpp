#pragma once

#include <cstddef>
#include <functional>

namespace wnc {

/// Positive-theta search grid: `points` log-spaced values in [lo, theta_max],
/// where theta_max is the largest finite point of a doubling search capped at `cap`.
struct ThetaGrid {
  std::size_t points = 200;
  double lo = 1e-4;
  double cap = 512.0;
};

struct ThetaOptimum {
  double theta = 0.0;
  double value = 0.0;
};

/// Largest theta in [grid.lo, grid.cap] reached by doubling (or halving from 1)
/// at which f stays finite. Returns 0 when f is infinite already at grid.lo.
double finite_theta_max(const std::function<double(double)>& f, const ThetaGrid& grid);

/// Minimizes f over the log grid up to theta_max, then refines between the
/// grid neighbours of the best point by golden-section search. Infinite
/// values are skipped; value is +inf when f is infinite on the whole grid.
ThetaOptimum minimize_over_theta(const std::function<double(double)>& f, const ThetaGrid& grid,
                                 double theta_max);

}  // namespace wnc
