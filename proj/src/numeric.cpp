#include "wnc/numeric.hpp"

#include <cmath>
#include <stack>

#include "wnc/error.hpp"

namespace wnc::numeric {

namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
  int depth;
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, double rel_tol, std::size_t max_evals) {
  QuadratureResult out;
  if (a == b) return out;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

  // Explicit stack: panels are refined depth first, left half before right half.
  std::stack<Panel> work;
  work.push({a, b, fa, fm, fb, whole, 0});
  double total = 0.0;
  while (!work.empty()) {
    Panel p = work.top();
    work.pop();
    const double mid = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + mid);
    const double rm = 0.5 * (mid + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evaluations += 2;
    const double left = (mid - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - mid) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;
    const double tol = std::max(abs_tol * (p.b - p.a) / (b - a), rel_tol * std::abs(left + right));
    if (p.depth >= 50 || std::abs(delta) <= 15.0 * tol || out.evaluations >= max_evals) {
      if (out.evaluations >= max_evals && std::abs(delta) > 15.0 * tol) out.converged = false;
      total += left + right + delta / 15.0;
      continue;
    }
    work.push({mid, p.b, p.fm, frm, p.fb, right, p.depth + 1});
    work.push({p.a, mid, p.fa, flm, p.fm, left, p.depth + 1});
  }
  out.value = total;
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NumericError("bisect", "no sign change on bracket");
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= x_tol) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double x_tol, std::size_t max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (std::size_t i = 0; i < max_iter && (hi - lo) > x_tol * std::max(1.0, std::abs(lo)); ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_space(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

}  // namespace wnc::numeric
