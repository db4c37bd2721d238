#pragma once

#include <memory>
#include <string>

#include "wnc/discrete_distribution.hpp"
#include "wnc/fading.hpp"

namespace wnc {

/// Law of the instantaneous capacity C of one slot: either induced by a fading
/// channel or given directly as a discrete distribution on [0, inf).
/// Cheap to copy; the discretized form of a continuous law is built once, on
/// first use, and shared between copies.
class CapacityLaw {
 public:
  CapacityLaw(ChannelSpec spec, FadingModel model);
  explicit CapacityLaw(DiscreteDistribution law);

  static CapacityLaw point_mass(double c);
  /// Two atoms {lo, hi} with P(C = hi) = p_hi.
  static CapacityLaw two_point(double lo, double hi, double p_hi = 0.5);

  bool is_discrete() const;
  /// The discrete law itself when is_discrete(), else the 4096-atom grid.
  const DiscreteDistribution& discretized() const;

  double cdf(double x) const;       // P(C <= x)
  double cdf_left(double x) const;  // P(C < x)
  double tail(double x) const;      // P(C > x)
  /// inf{x : P(C <= x) >= p}
  double quantile(double p) const;
  double cgf(double theta) const;
  double mean() const;
  double variance() const;
  /// Essential infimum and supremum (supremum may be +inf).
  double min_value() const;
  double max_value() const;
  /// One draw from three independent uniforms in (0, 1).
  double sample(double u1, double u2, double u3) const;

  std::string describe() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

}  // namespace wnc
