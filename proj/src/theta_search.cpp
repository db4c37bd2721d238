#include "wnc/theta_search.hpp"

#include <cmath>
#include <limits>

#include "wnc/error.hpp"
#include "wnc/numeric.hpp"

namespace wnc {

double finite_theta_max(const std::function<double(double)>& f, const ThetaGrid& grid) {
  if (!(grid.lo > 0.0) || !(grid.cap > grid.lo) || grid.points < 2)
    throw DomainError("theta grid: need 0 < lo < cap and at least two points");
  auto finite = [&](double th) { return std::isfinite(f(th)); };
  if (!finite(grid.lo)) return 0.0;
  double th = std::min(1.0, grid.cap);
  if (finite(th)) {
    while (th < grid.cap) {
      const double next = std::min(2.0 * th, grid.cap);
      if (!finite(next)) {
        // the finite domain ends inside (th, next]: narrow it down
        double lo = th;
        double hi = next;
        for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (finite(mid) ? lo : hi) = mid;
        }
        return lo;
      }
      th = next;
    }
    return th;
  }
  double hi = th;
  while (!finite(th)) {
    hi = th;
    th *= 0.5;
    if (th < grid.lo) return grid.lo;
  }
  double lo = th;
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (finite(mid) ? lo : hi) = mid;
  }
  return lo;
}

ThetaOptimum minimize_over_theta(const std::function<double(double)>& f, const ThetaGrid& grid,
                                 double theta_max) {
  ThetaOptimum best{0.0, std::numeric_limits<double>::infinity()};
  if (!(theta_max >= grid.lo)) return best;
  const auto pts = theta_max > grid.lo ? numeric::log_space(grid.lo, theta_max, grid.points)
                                       : std::vector<double>{grid.lo};
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double v = f(pts[k]);
    if (std::isfinite(v) && v < best.value) {
      best = {pts[k], v};
      best_k = k;
    }
  }
  if (!std::isfinite(best.value) || pts.size() < 3) return best;
  const double a = pts[best_k == 0 ? 0 : best_k - 1];
  const double b = pts[std::min(best_k + 1, pts.size() - 1)];
  auto guarded = [&](double th) {
    const double v = f(th);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  const double th = numeric::golden_section_min(guarded, a, b, 1e-12, 200);
  const double v = f(th);
  if (std::isfinite(v) && v < best.value) best = {th, v};
  return best;
}

}  // namespace wnc
