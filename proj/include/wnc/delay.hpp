#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wnc/processes.hpp"
#include "wnc/simulate.hpp"

namespace wnc {

/// Constant fluid arrivals: lambda bits per slot.
struct ArrivalSpec {
  double lambda = 0.5;
};
void validate(const ArrivalSpec& arrival);

struct LundbergSolution {
  double theta_star = 0.0;  // +inf when the walk can never move up
  double kappa_residual = 0.0;
  bool stable = false;
};

/// Positive root of a convex f with f(0) = 0 and f'(0) < 0: brackets from
/// theta = 1 by doubling, then bisects until the bracket stops shrinking.
/// Throws NumericError when the residual is not below 1e-9.
LundbergSolution convex_positive_root(const std::function<double(double)>& f);

/// E[C] - lambda (pi-weighted for Markov processes).
double stability_margin(const CapacityProcess& process, const ArrivalSpec& arrival);

/// Positive root of log E[exp(theta (m lambda - C))] = 0, m = offset_multiplier.
/// Throws UnstableError when m lambda >= E[C].
LundbergSolution lundberg_root(const Additive& process, const ArrivalSpec& arrival,
                               double offset_multiplier = 1.0);
/// Positive root of kappa_C(-theta) + theta m lambda = 0 with kappa_C the log
/// Perron-Frobenius eigenvalue of the kernel's MGF matrix.
LundbergSolution lundberg_root(const MarkovKernel& kernel, const ArrivalSpec& arrival,
                               double offset_multiplier = 1.0);

struct CramerPrefactors {
  double c_minus = 1.0;
  double c_plus = 1.0;
};

/// inf and sup over x in [0, x0) of P(X > x) / E[exp(theta (X - x)); X > x]
/// for the walk increment X = lambda - C, exact on the atoms of the law.
CramerPrefactors cramer_prefactors(const DiscreteDistribution& capacity, double lambda,
                                   double theta);

struct DelayBounds {
  BoundReport lower;
  BoundReport upper;
  double theta_star = 0.0;
  double c_minus = 1.0;
  double c_plus = 1.0;
};

/// C_- e^{-theta lambda d} <= P(D > d) <= C_+ e^{-theta lambda d}.
DelayBounds delay_tail_additive(const Additive& process, const ArrivalSpec& arrival, double d,
                                double offset_multiplier = 1.0);

struct MarkovDelayBounds {
  double theta_star = 0.0;
  Eigen::VectorXd h;  // right eigenvector at -theta_star, pi . h = 1
  std::vector<double> state_lower;
  std::vector<double> state_upper;
  double stationary_lower = 0.0;
  double stationary_upper = 1.0;
  bool improved = false;  // improved prefactors available
  double improved_c_minus = 0.0;
  double improved_c_plus = 0.0;
  std::vector<double> improved_state_lower;
  std::vector<double> improved_state_upper;
  double improved_stationary_lower = 0.0;
  double improved_stationary_upper = 1.0;
  /// Reported pair: for the requested start state (stationary mixture when
  /// none), the tighter of the plain and improved bounds.
  DelayBounds report;
};

MarkovDelayBounds delay_tail_markov(const MarkovAdditive& process, const ArrivalSpec& arrival,
                                    double d, std::optional<std::size_t> initial_state = std::nullopt,
                                    double offset_multiplier = 1.0);

/// P(D(t) > d) = P(C < lambda - lambda d / t); horizon nullopt gives P(C < lambda).
BoundReport delay_tail_comonotonic(const Comonotonic& process, const ArrivalSpec& arrival,
                                   double d, std::optional<double> horizon = std::nullopt);

/// Delay bounds for any supported process at the given start state.
DelayBounds delay_tail(const CapacityProcess& process, const ArrivalSpec& arrival, double d,
                       std::optional<double> horizon = std::nullopt);

/// P(B > x) = P(D > x / lambda).
DelayBounds backlog_tail(const CapacityProcess& process, const ArrivalSpec& arrival, double x,
                         std::optional<double> horizon = std::nullopt);

struct DelayConstrainedCapacity {
  double lambda_conservative = 0.0;  // upper delay bound <= epsilon up to here
  double lambda_optimistic = 0.0;    // lower delay bound <= epsilon up to here
  double one_shot_lower = 0.0;       // -log(eps / C_-) / (theta d) at lambda_conservative
  double one_shot_upper = 0.0;       // -log(eps / C_+) / (theta d) at lambda_conservative
  bool feasible = true;
  std::string notes;
};

DelayConstrainedCapacity delay_constrained_capacity(const CapacityProcess& process, double d,
                                                    double epsilon);

struct ChebyshevBound {
  double bound = 0.0;  // Var[mean capacity over t] / x^2, unclipped
  double variance = 0.0;
  double ci_low = 0.0;  // 99% interval of an estimated variance
  double ci_high = 0.0;
  bool estimated = false;
};

/// P(|C(t) - E C| >= x) <= Var[C(t)] / x^2 for the transient capacity C(t) = S(t) / t.
/// Additive: Var[C] / t; other structures estimate the variance from `config.runs` traces.
ChebyshevBound chebyshev_transient(const CapacityProcess& process, std::uint64_t t, double x,
                                   const sim::SimConfig& config = {1, 100'000, 1, 0, 1});

}  // namespace wnc
