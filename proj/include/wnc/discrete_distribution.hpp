#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wnc {

/// Probability law on finitely many atoms.
///
/// The common numeric currency of the toolkit: CDFs, tails, stop-loss values,
/// convolutions and per-transition increment laws of Markov kernels are all
/// represented with it. Immutable after construction.
class DiscreteDistribution {
 public:
  /// Validates: support strictly increasing and finite, masses nonnegative,
  /// total mass within 1e-9 of one.
  DiscreteDistribution(std::vector<double> support, std::vector<double> mass);

  static DiscreteDistribution point_mass(double value);

  /// Discretizes a continuous law onto `points` equally spaced atoms spanning
  /// [quantile(q_lo), quantile(q_hi)]. Mass of each cell (x_k, x_{k+1}] is
  /// placed on the left atom x_k, so the result is stochastically smaller
  /// than the source law.
  static DiscreteDistribution discretize(const std::function<double(double)>& cdf,
                                         const std::function<double(double)>& quantile,
                                         std::size_t points = 4096, double q_lo = 1e-9,
                                         double q_hi = 1.0 - 1e-9);

  std::size_t size() const noexcept { return support_.size(); }
  std::span<const double> support() const noexcept { return support_; }
  std::span<const double> mass() const noexcept { return mass_; }

  double min() const noexcept { return support_.front(); }
  double max() const noexcept { return support_.back(); }
  bool degenerate() const noexcept { return support_.size() == 1; }

  /// P(X <= x).
  double cdf(double x) const;
  /// P(X < x).
  double cdf_left(double x) const;
  /// P(X > x), summed from the upper end so deep tails keep full precision.
  double tail(double x) const;
  /// P(X >= x).
  double tail_closed(double x) const;
  /// inf{x : F(x) >= p} for p in (0, 1].
  double quantile(double p) const;

  double mean() const;
  double variance() const;

  /// log E[exp(theta X)], evaluated with log-sum-exp.
  double log_mgf(double theta) const;

  /// Law of scale * X + shift. `scale` must be nonzero.
  DiscreteDistribution affine(double scale, double shift) const;

  /// Exact law of X + Y for independent X ~ *this, Y ~ other. Atoms closer than
  /// 1e-12 (relative) are merged.
  DiscreteDistribution convolve(const DiscreteDistribution& other) const;

  /// Law of X + Y on a uniform grid of at most `points` atoms (left-endpoint binning).
  DiscreteDistribution convolve_grid(const DiscreteDistribution& other,
                                     std::size_t points = 4096) const;

  /// Rebins onto `points` equally spaced atoms over [min, max] (left-endpoint binning).
  DiscreteDistribution rebin(std::size_t points) const;

  /// Builds a law from possibly unsorted, duplicated atoms.
  static DiscreteDistribution from_atoms(std::vector<double> values, std::vector<double> mass);

 private:
  DiscreteDistribution() = default;
  void build_cumulative();

  std::vector<double> support_;
  std::vector<double> mass_;
  std::vector<double> cumulative_;  // P(X <= support_[k])
  std::vector<double> upper_;       // P(X >= support_[k])
};

}  // namespace wnc
