#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wnc/delay.hpp"
#include "wnc/simulate.hpp"

namespace wnc {

/// Sorted sample of a real random variable with a provenance label.
class SampleSet {
 public:
  SampleSet(std::vector<double> values, std::string label = {});

  const std::vector<double>& values() const { return values_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return values_.size(); }
  double mean() const { return mean_; }
  double variance() const;
  /// Empirical P(X <= x).
  double cdf(double x) const;
  /// E[(X - t)^+] and E[(t - X)^+], exact over the sample.
  double stop_loss(double t) const;
  double reverse_stop_loss(double t) const;

 private:
  std::vector<double> values_;
  std::vector<double> suffix_;  // suffix_[k] = sum of values_[k..]
  std::string label_;
  double mean_ = 0.0;
};

/// S(t) of `config.runs` replicas of the process.
SampleSet sample_sums(const CapacityProcess& process, std::uint64_t t, const sim::SimConfig& config,
                      std::string label = {});

enum class OrderRelation { st, cx, icx };
enum class Verdict { yes, no, inconclusive };
std::string to_string(OrderRelation relation);
std::string to_string(Verdict verdict);

/// Outcome of checking X <= Y. yes: every violation within tolerance; no: a
/// violation above three tolerances; inconclusive otherwise.
struct OrderVerdict {
  OrderRelation relation = OrderRelation::st;
  Verdict holds = Verdict::inconclusive;
  double max_violation = 0.0;
  std::optional<double> violation_location;
  double tolerance_used = 0.0;
  std::string reason;
};

/// F_X >= F_Y at the pooled order statistics. Default tolerance: the sum of
/// the two 99% Dvoretzky-Kiefer-Wolfowitz radii.
OrderVerdict st_order(const SampleSet& x, const SampleSet& y, std::optional<double> tol = {});

/// E[(X - t)^+] <= E[(Y - t)^+] on 512 points spanning the pooled range.
/// Default tolerance: three standard errors of the stop-loss difference,
/// maximized over the grid.
OrderVerdict icx_order(const SampleSet& x, const SampleSet& y, std::optional<double> tol = {});

/// Equal means (within three standard errors unless `tol` is given), then the
/// icx check and its mirror E[(t - X)^+] <= E[(t - Y)^+].
OrderVerdict cx_order(const SampleSet& x, const SampleSet& y, std::optional<double> tol = {});

/// Positive root of lim (1/t) log E[exp(-theta S(t))] + theta lambda = 0.
/// nullopt when no positive root exists (the walk drifts up for every theta,
/// as for a comonotonic channel that can fade below lambda); +inf when the
/// capacity never falls below lambda.
std::optional<double> adjustment_coefficient(const CapacityProcess& process,
                                             const ArrivalSpec& arrival);

struct AdjustmentOrdering {
  std::optional<double> theta_a;
  std::optional<double> theta_b;
  OrderVerdict cx;  // S_A <=_cx S_B at the probe horizon
  bool consistent = true;
  std::string notes;
};

/// Checks the implication S_A <=_cx S_B  =>  theta_A >= theta_B: the less
/// variable capacity has the faster delay decay. The converse is never asserted.
AdjustmentOrdering adjustment_ordering(const CapacityProcess& a, const CapacityProcess& b,
                                       const ArrivalSpec& arrival, const sim::SimConfig& config,
                                       std::uint64_t probe_horizon = 20, double tol = 1e-9);

struct DelayOrderingReport {
  std::vector<double> d_grid;
  std::vector<sim::TailEstimate> negative;     // N
  std::vector<sim::TailEstimate> independent;  // independent slots
  std::vector<sim::TailEstimate> positive;     // P
  bool chain_holds = true;
  std::vector<std::string> violations;
  std::optional<double> dcc_negative;
  std::optional<double> dcc_independent;
  std::optional<double> dcc_positive;
  bool dcc_chain_holds = true;
};

/// Monte Carlo delay tails of three processes with a shared marginal, checked
/// for P(D_N) <= P(D_ind) <= P(D_P) pointwise with three standard errors of the
/// difference as slack, plus the reversed order of the delay-constrained
/// capacities at (dcc_d, dcc_epsilon) where an analytic bound exists. Delay
/// tails count the event `event` (strict exceedance by default).
DelayOrderingReport delay_ordering_check(const CapacityProcess& negative,
                                         const CapacityProcess& independent,
                                         const CapacityProcess& positive,
                                         const ArrivalSpec& arrival,
                                         const std::vector<double>& d_grid,
                                         sim::SimConfig config,
                                         sim::TailEvent event = sim::TailEvent::exceeds,
                                         double dcc_d = 10.0, double dcc_epsilon = 1e-2);

}  // namespace wnc
