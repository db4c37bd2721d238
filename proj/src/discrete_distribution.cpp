#include "wnc/discrete_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wnc/error.hpp"

namespace wnc {

DiscreteDistribution::DiscreteDistribution(std::vector<double> support, std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  if (support_.empty()) throw ValidationError("DiscreteDistribution: empty support");
  if (support_.size() != mass_.size())
    throw ValidationError("DiscreteDistribution: support and mass differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (!std::isfinite(support_[k]))
      throw ValidationError("DiscreteDistribution: non-finite support point");
    if (k > 0 && !(support_[k] > support_[k - 1]))
      throw ValidationError("DiscreteDistribution: support not strictly increasing");
    if (!(mass_[k] >= 0.0) || !std::isfinite(mass_[k]))
      throw ValidationError("DiscreteDistribution: negative or non-finite mass");
    total += mass_[k];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("DiscreteDistribution: total mass " + std::to_string(total) +
                          " is not 1");
  build_cumulative();
}

void DiscreteDistribution::build_cumulative() {
  const std::size_t n = support_.size();
  cumulative_.resize(n);
  upper_.resize(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += mass_[k];
    cumulative_[k] = std::min(acc, 1.0);
  }
  acc = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    acc += mass_[k];
    upper_[k] = std::min(acc, 1.0);
  }
}

DiscreteDistribution DiscreteDistribution::point_mass(double value) {
  return DiscreteDistribution({value}, {1.0});
}

DiscreteDistribution DiscreteDistribution::discretize(const std::function<double(double)>& cdf,
                                                      const std::function<double(double)>& quantile,
                                                      std::size_t points, double q_lo,
                                                      double q_hi) {
  if (points < 2) throw ValidationError("discretize: need at least two points");
  const double lo = quantile(q_lo);
  const double hi = quantile(q_hi);
  if (!(hi > lo)) return point_mass(lo);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> support(points);
  std::vector<double> mass(points);
  double prev = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    support[k] = lo + h * static_cast<double>(k);
    if (k + 1 < points) {
      const double next = std::clamp(cdf(lo + h * static_cast<double>(k + 1)), 0.0, 1.0);
      mass[k] = std::max(0.0, next - prev);
      prev = std::max(prev, next);
    } else {
      mass[k] = std::max(0.0, 1.0 - prev);
    }
  }
  // cell (x_k, x_{k+1}] goes to x_k; mass below x_1 lands on x_0
  return DiscreteDistribution(std::move(support), std::move(mass));
}

double DiscreteDistribution::cdf(double x) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double DiscreteDistribution::cdf_left(double x) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double DiscreteDistribution::tail(double x) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.end()) return 0.0;
  return upper_[static_cast<std::size_t>(it - support_.begin())];
}

double DiscreteDistribution::tail_closed(double x) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), x);
  if (it == support_.end()) return 0.0;
  return upper_[static_cast<std::size_t>(it - support_.begin())];
}

double DiscreteDistribution::quantile(double p) const {
  if (!(p > 0.0) || p > 1.0) throw DomainError("quantile: p must lie in (0, 1]");
  if (cumulative_.size() <= 16) {
    // branchless count: sampling loops call this with random p
    std::size_t k = 0;
    for (double c : cumulative_) k += c < p ? 1 : 0;
    return support_[std::min(k, support_.size() - 1)];
  }
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
  if (it == cumulative_.end()) return support_.back();
  return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < size(); ++k) m += support_[k] * mass_[k];
  return m;
}

double DiscreteDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < size(); ++k) v += (support_[k] - m) * (support_[k] - m) * mass_[k];
  return v;
}

double DiscreteDistribution::log_mgf(double theta) const {
  if (theta == 0.0) return 0.0;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k)
    if (mass_[k] > 0.0) peak = std::max(peak, theta * support_[k]);
  double acc = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    if (mass_[k] > 0.0) acc += mass_[k] * std::exp(theta * support_[k] - peak);
  return peak + std::log(acc);
}

DiscreteDistribution DiscreteDistribution::affine(double scale, double shift) const {
  if (scale == 0.0 || !std::isfinite(scale)) throw ValidationError("affine: scale must be nonzero");
  std::vector<double> values(size());
  std::vector<double> mass(mass_);
  for (std::size_t k = 0; k < size(); ++k) values[k] = scale * support_[k] + shift;
  if (scale < 0.0) {
    std::reverse(values.begin(), values.end());
    std::reverse(mass.begin(), mass.end());
  }
  return from_atoms(std::move(values), std::move(mass));
}

DiscreteDistribution DiscreteDistribution::from_atoms(std::vector<double> values,
                                                      std::vector<double> mass) {
  if (values.size() != mass.size() || values.empty())
    throw ValidationError("from_atoms: bad atom lists");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> support;
  std::vector<double> merged;
  for (std::size_t idx : order) {
    const double v = values[idx];
    if (!support.empty() &&
        std::abs(v - support.back()) <= 1e-12 * std::max(1.0, std::abs(v))) {
      merged.back() += mass[idx];
    } else {
      support.push_back(v);
      merged.push_back(mass[idx]);
    }
  }
  DiscreteDistribution out;
  out.support_ = std::move(support);
  out.mass_ = std::move(merged);
  double total = std::accumulate(out.mass_.begin(), out.mass_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("from_atoms: mass does not sum to 1");
  out.build_cumulative();
  return out;
}

DiscreteDistribution DiscreteDistribution::convolve(const DiscreteDistribution& other) const {
  std::vector<double> values;
  std::vector<double> mass;
  values.reserve(size() * other.size());
  mass.reserve(size() * other.size());
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < other.size(); ++j) {
      values.push_back(support_[i] + other.support_[j]);
      mass.push_back(mass_[i] * other.mass_[j]);
    }
  return from_atoms(std::move(values), std::move(mass));
}

DiscreteDistribution DiscreteDistribution::rebin(std::size_t points) const {
  if (points < 2 || size() <= points) return *this;
  const double lo = min();
  const double hi = max();
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> support(points);
  std::vector<double> mass(points, 0.0);
  for (std::size_t k = 0; k < points; ++k) support[k] = lo + h * static_cast<double>(k);
  for (std::size_t k = 0; k < size(); ++k) {
    auto cell = static_cast<std::size_t>(std::floor((support_[k] - lo) / h + 1e-9));
    mass[std::min(cell, points - 1)] += mass_[k];
  }
  std::vector<double> s2;
  std::vector<double> m2;
  for (std::size_t k = 0; k < points; ++k)
    if (mass[k] > 0.0) {
      s2.push_back(support[k]);
      m2.push_back(mass[k]);
    }
  return from_atoms(std::move(s2), std::move(m2));
}

DiscreteDistribution DiscreteDistribution::convolve_grid(const DiscreteDistribution& other,
                                                         std::size_t points) const {
  const DiscreteDistribution a = rebin(points);
  const DiscreteDistribution b = other.rebin(points);
  // common step: the coarser of the two grids
  auto step_of = [](const DiscreteDistribution& d) {
    return d.size() > 1 ? (d.max() - d.min()) / static_cast<double>(d.size() - 1) : 0.0;
  };
  const double h = std::max(step_of(a), step_of(b));
  if (h == 0.0) return a.convolve(b);
  auto to_grid = [h](const DiscreteDistribution& d) {
    const auto cells = static_cast<std::size_t>(std::ceil((d.max() - d.min()) / h - 1e-9)) + 1;
    std::vector<double> m(cells, 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
      auto c = static_cast<std::size_t>(std::floor((d.support_[k] - d.min()) / h + 1e-9));
      m[std::min(c, cells - 1)] += d.mass_[k];
    }
    return m;
  };
  const std::vector<double> ma = to_grid(a);
  const std::vector<double> mb = to_grid(b);
  std::vector<double> mc(ma.size() + mb.size() - 1, 0.0);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (ma[i] == 0.0) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) mc[i + j] += ma[i] * mb[j];
  }
  const double base = a.min() + b.min();
  std::vector<double> values;
  std::vector<double> mass;
  for (std::size_t k = 0; k < mc.size(); ++k)
    if (mc[k] > 0.0) {
      values.push_back(base + h * static_cast<double>(k));
      mass.push_back(mc[k]);
    }
  return from_atoms(std::move(values), std::move(mass)).rebin(points);
}

}  // namespace wnc
