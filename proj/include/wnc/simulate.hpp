#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "wnc/hop_chain.hpp"
#include "wnc/processes.hpp"

namespace wnc::sim {

/// Event counted by the delay estimators: D >= d (reaches) or D > d (exceeds).
/// The two differ only when the walk has atoms at the level.
enum class TailEvent { reaches, exceeds };

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t runs = 10'000;
  std::uint64_t horizon = 1'000;
  std::uint64_t warmup = 0;
  unsigned threads = 1;
  TailEvent event = TailEvent::reaches;
};

/// Throws ValidationError unless runs >= 1 and horizon > warmup.
void validate(const SimConfig& config);

struct TailEstimate {
  double point = 0.0;
  double std_error = 0.0;  // sqrt(p (1 - p) / runs_used)
  std::uint64_t runs_used = 0;
};

TailEstimate make_estimate(std::uint64_t hits, std::uint64_t runs);

/// Slot-by-slot capacity generator for one replica. Every draw is a function
/// of (stream key, slot), so a replica is reproducible on its own.
class SlotStream {
 public:
  SlotStream(const CapacityProcess& process, std::uint64_t key);
  /// Capacity of the next slot.
  double next();
  /// Current modulating state (0 for non-Markov processes).
  std::size_t state() const { return state_; }
  std::uint64_t slot() const { return slot_; }

 private:
  double draw(const CapacityLaw& law, std::uint64_t s) const;

  const CapacityProcess* process_;
  std::uint64_t key_;
  std::uint64_t slot_ = 0;
  std::size_t state_ = 0;
  double held_ = 0.0;
};

struct Trace {
  std::vector<double> capacity;
  std::vector<std::size_t> state;  // state entered at each slot (Markov), else zeros
};

/// Trace of replica `run` under `seed`.
Trace sample_capacity_trace(const CapacityProcess& process, std::uint64_t horizon,
                            std::uint64_t seed, std::uint64_t run);

struct LindleyPaths {
  std::vector<double> backlog;  // B(0) = 0, ..., B(H)
  std::vector<double> delay;    // B(t) / lambda
};

/// B(t + 1) = [B(t) + lambda - C(t)]^+ from B(0) = 0.
LindleyPaths lindley_queue(double lambda, const std::vector<double>& trace);

/// Delay tail (event per config.event) for the stationary delay: per replica, the walk
/// lambda (t - warmup) - S(warmup, t) over the window (warmup, horizon] is
/// compared against lambda d. Conditional on the start state for Markov
/// processes with a fixed initial state and zero warmup.
std::vector<TailEstimate> empirical_delay_tail(const CapacityProcess& process, double lambda,
                                               const std::vector<double>& d_grid,
                                               const SimConfig& config);
TailEstimate empirical_delay_tail(const CapacityProcess& process, double lambda, double d,
                                  const SimConfig& config);

/// One pass of empirical_delay_tail that also splits the replicas by the
/// state the chain occupies when the observation window opens.
struct StateDelayTail {
  std::vector<TailEstimate> overall;
  std::vector<std::vector<TailEstimate>> by_state;  // [state][d]
  std::vector<std::uint64_t> state_runs;
};
StateDelayTail empirical_delay_tail_by_state(const MarkovAdditive& process, double lambda,
                                             const std::vector<double>& d_grid,
                                             const SimConfig& config);

/// Delay tail at horizon H and 2H; `converged` when every grid point moved by
/// at most one standard error. `estimates` holds the 2H values.
struct ConvergedTail {
  std::vector<TailEstimate> estimates;
  bool converged = false;
  std::uint64_t horizon = 0;
};
ConvergedTail converged_delay_tail(const CapacityProcess& process, double lambda,
                                   const std::vector<double>& d_grid, SimConfig config,
                                   int max_doublings = 3);

/// One flow whose first-pass output is fed back into the same queue one slot
/// later. FIFO fluid queue; fresh traffic lambda per slot queues behind the
/// fed-back traffic of the same slot. Returns the tail of the first-pass
/// delay D = (fresh backlog at the horizon) / lambda.
std::vector<TailEstimate> feedback_queue(const CapacityProcess& process, double lambda,
                                         const std::vector<double>& d_grid,
                                         const SimConfig& config);

/// Hop-by-hop fluid queues, cut-through within a slot. Hop i serves at
/// max(0, C_i(t) - (2K - 2) lambda) for the interfering flows. Returns
/// the tail of the end-to-end delay D = (network backlog at the horizon) / lambda.
std::vector<TailEstimate> tandem_queue(const HopChain& chain, double lambda,
                                       const std::vector<double>& d_grid,
                                       const SimConfig& config);

/// S(t) of each replica.
std::vector<double> sample_cumulative(const CapacityProcess& process, std::uint64_t t,
                                      const SimConfig& config);

/// Empirical P(S(t) <= x) with standard error.
TailEstimate empirical_cdf(const std::vector<double>& samples, double x);

/// Kolmogorov-Smirnov distance of samples to a CDF, and the asymptotic 99.9%
/// critical value for n samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_critical_999(std::size_t n);
/// Two-sample KS distance and its asymptotic 99.9% critical value.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_two_sample_critical_999(std::size_t n, std::size_t m);

/// Columnar dump (run, slot, state, capacity, backlog) of the first `runs` replicas.
void write_trace_dump(std::ostream& os, const CapacityProcess& process, double lambda,
                      const SimConfig& config, std::uint64_t runs);

/// Runs body(worker, begin, end) over contiguous run ranges on up to
/// config.threads threads. Callers reduce per-run results in run order.
void for_each_run_range(std::uint64_t runs, unsigned threads,
                        const std::function<void(std::uint64_t, std::uint64_t)>& body);

}  // namespace wnc::sim
