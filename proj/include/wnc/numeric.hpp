#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace wnc::numeric {

struct QuadratureResult {
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// Adaptive Simpson on [a, b]. Stops refining a panel when its Richardson error
/// estimate is below max(abs_tol, rel_tol * |panel|); never exceeds max_evals.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol = 1e-10, double rel_tol = 1e-12,
                                  std::size_t max_evals = 1'000'000);

/// Bisection for a sign change of f on [lo, hi]. Requires f(lo) and f(hi) of
/// opposite signs (or one of them zero). Iterates until the bracket is below
/// x_tol or stops shrinking in floating point.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol);

/// Golden-section minimization of a unimodal f on [lo, hi].
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double x_tol = 1e-12, std::size_t max_iter = 200);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t n);

/// n equally spaced points from lo to hi inclusive.
std::vector<double> lin_space(double lo, double hi, std::size_t n);

}  // namespace wnc::numeric
