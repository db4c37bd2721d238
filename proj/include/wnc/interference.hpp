#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wnc/delay.hpp"
#include "wnc/hop_chain.hpp"

namespace wnc {

/// Amounts f(s, t) for 0 <= s <= t <= horizon, stored as a dense upper triangle.
class BivariateTrace {
 public:
  explicit BivariateTrace(std::size_t horizon);
  /// f(s, t) = a(t) - a(s) from a cumulative path a(0..horizon).
  static BivariateTrace from_cumulative(const std::vector<double>& cumulative);
  /// c (t - s).
  static BivariateTrace constant_rate(std::size_t horizon, double c);

  std::size_t horizon() const { return horizon_; }
  double operator()(std::size_t s, std::size_t t) const;
  void set(std::size_t s, std::size_t t, double v);

 private:
  std::size_t index(std::size_t s, std::size_t t) const;
  std::size_t horizon_;
  std::vector<double> values_;
};

/// (f (x) g)(s, t) = min over u in [s, t] of f(s, u) + g(u, t).
BivariateTrace minplus_convolve(const BivariateTrace& f, const BivariateTrace& g);

/// (S(s, t) - (A(t) - A(s)))^+ for a cumulative arrival path A(0..horizon).
BivariateTrace single_hop_leftover(const BivariateTrace& service,
                                   const std::vector<double>& arrivals);

/// S(s, t) <= S(s, u) + S(u, t) for every s <= u <= t, up to `tol`.
bool is_subadditive(const BivariateTrace& service, double tol = 1e-12);

struct FeedbackBound {
  double theta_star = 0.0;
  BoundReport report;    // prefactor 1 (Markov: h(i) / min h)
  BoundReport improved;  // Cramer prefactor where available
};

/// Lundberg bound for a flow whose output returns to the same queue: the walk
/// increment is m lambda - C with m = `multiplier` (2 for one feedback pass).
/// Throws UnstableError("feedback-unstable ...") when m lambda >= E[C].
FeedbackBound feedback_delay_additive(const Additive& process, const ArrivalSpec& arrival,
                                      double d, double multiplier = 2.0);
FeedbackBound feedback_delay_markov(const MarkovAdditive& process, const ArrivalSpec& arrival,
                                    double d, std::optional<std::size_t> initial_state = std::nullopt,
                                    double multiplier = 2.0);

/// Effective service of a multi-hop chain under K-hop interference.
struct MultihopService {
  bool shared = false;
  double multiplier = 1.0;  // 2 K_eff - 1
  /// Shared channel: the single-hop process that carries the multiplied arrivals.
  std::optional<CapacityProcess> collapsed;
  /// Separate channels: per-hop processes, each serving the flow and its interferers.
  std::vector<CapacityProcess> hops;
  std::string notes;
};

MultihopService multihop_service_bound(const HopChain& chain, const ArrivalSpec& arrival);

/// Delay bound of a shared-channel chain: the single-hop bound with arrival
/// increment (2 K_eff - 1) lambda. Separate channels go through the
/// end-to-end bound with theta optimized.
DelayBounds multihop_delay_bound(const HopChain& chain, const ArrivalSpec& arrival, double d);

struct E2EBound {
  BoundReport report;
  bool diverged = false;
  std::size_t terms = 0;   // t-terms summed before the tail closure
  double tail_mass = 0.0;  // geometric closure added after the last term
};

/// Segmentation bound for additive hops:
///   P(D >= d) <= e^{-theta lambda d} sum_t sum_{segmentations of [0, t]} prod_i rho_i^{len_i},
///   rho_i = exp(kappa_i(-theta) + theta (2K - 1) lambda + theta lambda).
/// The inner sum runs as a dynamic program over segment boundaries; the outer
/// sum stops after 50 consecutive terms below eps_tail times the running total
/// with a term ratio below 1, then adds the geometric tail. A divergent sum is
/// reported, not thrown.
E2EBound e2e_delay_bound(const HopChain& chain, const ArrivalSpec& arrival, double d, double theta,
                         std::size_t t_max = 1'000'000, double eps_tail = 1e-12);

/// e2e_delay_bound minimized over theta (log grid plus golden-section refinement).
E2EBound e2e_delay_bound_optimized(const HopChain& chain, const ArrivalSpec& arrival, double d,
                                   const ThetaGrid& grid = {});

}  // namespace wnc
