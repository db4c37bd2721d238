#include "wnc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <exception>
#include <ostream>
#include <thread>

#include "wnc/error.hpp"
#include "wnc/rng.hpp"

namespace wnc::sim {

namespace {

// A path hits level x when its peak is > threshold(x). Comparisons tolerate
// rounding in accumulated sums.
double threshold(TailEvent event, double level) {
  const double tol = 1e-9 * std::max(1.0, std::abs(level));
  return event == TailEvent::reaches ? level - tol : level + tol;
}

std::uint64_t hop_seed(std::uint64_t seed, std::size_t hop) {
  return hop == 0 ? seed : seed ^ rng::mix64(0xA5A5A5A5ull + hop);
}

std::vector<TailEstimate> to_estimates(const std::vector<std::uint64_t>& hits, std::uint64_t runs) {
  std::vector<TailEstimate> out;
  out.reserve(hits.size());
  for (auto h : hits) out.push_back(make_estimate(h, runs));
  return out;
}

// Per-chunk hit counters summed in chunk order.
class HitCounter {
 public:
  HitCounter(std::size_t bins, std::uint64_t runs, unsigned threads)
      : threads_(std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(runs, 1024))))),
        counts_(threads_, std::vector<std::uint64_t>(bins, 0)) {}
  unsigned threads() const { return threads_; }
  std::vector<std::uint64_t>& chunk(std::size_t k) { return counts_[k]; }
  std::vector<std::uint64_t> total() const {
    std::vector<std::uint64_t> out(counts_[0].size(), 0);
    for (const auto& c : counts_)
      for (std::size_t i = 0; i < c.size(); ++i) out[i] += c[i];
    return out;
  }

 private:
  unsigned threads_;
  std::vector<std::vector<std::uint64_t>> counts_;
};

void run_chunks(std::uint64_t runs, unsigned chunks,
                const std::function<void(std::size_t, std::uint64_t, std::uint64_t)>& body) {
  if (chunks <= 1) {
    body(0, 0, runs);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(chunks);
  for (unsigned k = 0; k < chunks; ++k) {
    const std::uint64_t begin = runs * k / chunks;
    const std::uint64_t end = runs * (k + 1) / chunks;
    pool.emplace_back([&, k, begin, end] {
      try {
        body(k, begin, end);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void validate(const SimConfig& config) {
  if (config.runs < 1) throw ValidationError("invalid sim.runs: must be at least 1");
  if (config.horizon <= config.warmup)
    throw ValidationError("invalid sim.horizon: must exceed sim.warmup");
}

TailEstimate make_estimate(std::uint64_t hits, std::uint64_t runs) {
  TailEstimate e;
  e.runs_used = runs;
  e.point = runs == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(runs);
  e.std_error = runs == 0 ? 0.0 : std::sqrt(e.point * (1.0 - e.point) / static_cast<double>(runs));
  return e;
}

SlotStream::SlotStream(const CapacityProcess& process, std::uint64_t key)
    : process_(&process), key_(key) {
  if (const auto* m = std::get_if<MarkovAdditive>(&process)) {
    if (m->initial_state) {
      state_ = *m->initial_state;
    } else {
      const double u = rng::uniform(key_, rng::slot_counter(0, 7));
      const auto& pi = m->kernel.stationary();
      double acc = 0.0;
      state_ = m->kernel.size() - 1;
      for (Eigen::Index i = 0; i < pi.size(); ++i) {
        acc += pi(i);
        if (u <= acc) {
          state_ = static_cast<std::size_t>(i);
          break;
        }
      }
    }
  }
}

double SlotStream::next() {
  const std::uint64_t s = slot_++;
  auto u = [&](unsigned lane) { return rng::uniform(key_, rng::slot_counter(s, lane)); };
  switch (process_->index()) {
    case 0: {  // comonotonic: one uniform for the whole replica
      if (s == 0) held_ = std::get<Comonotonic>(*process_).marginal.quantile(u(1));
      return held_;
    }
    case 1:
      return draw(std::get<Additive>(*process_).marginal, s);
    case 2: {
      const auto& kernel = std::get<MarkovAdditive>(*process_).kernel;
      const auto& p = kernel.transition();
      const double v = u(0);
      const auto i = static_cast<Eigen::Index>(state_);
      // j = number of cumulative row sums below v; zero-probability states are
      // skipped because their cumulative sum repeats the previous one
      std::size_t j = 0;
      double acc = 0.0;
      for (Eigen::Index k = 0; k + 1 < p.cols(); ++k) {
        acc += p(i, k);
        j += acc < v ? 1 : 0;
      }
      const double c = draw(kernel.law(state_, j), s);
      state_ = j;
      return c;
    }
    default: {  // antithetic pairs (F^-1(U), F^-1(1 - U))
      const auto& law = std::get<Antithetic>(*process_).marginal;
      if (s % 2 == 0) {
        const double w = u(1);
        held_ = law.quantile(1.0 - w);
        return law.quantile(w);
      }
      return held_;
    }
  }
}

double SlotStream::draw(const CapacityLaw& law, std::uint64_t s) const {
  const double u1 = rng::uniform(key_, rng::slot_counter(s, 1));
  if (law.is_discrete()) return law.discretized().quantile(u1);
  return law.sample(u1, rng::uniform(key_, rng::slot_counter(s, 2)),
                    rng::uniform(key_, rng::slot_counter(s, 3)));
}

Trace sample_capacity_trace(const CapacityProcess& process, std::uint64_t horizon,
                            std::uint64_t seed, std::uint64_t run) {
  SlotStream stream(process, rng::stream_key(seed, run));
  Trace out;
  out.capacity.reserve(horizon);
  out.state.reserve(horizon);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    out.capacity.push_back(stream.next());
    out.state.push_back(stream.state());
  }
  return out;
}

LindleyPaths lindley_queue(double lambda, const std::vector<double>& trace) {
  if (!(lambda > 0.0)) throw DomainError("lindley_queue: lambda must be positive");
  LindleyPaths out;
  out.backlog.resize(trace.size() + 1);
  out.delay.resize(trace.size() + 1);
  double b = 0.0;
  out.backlog[0] = 0.0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    b = std::max(0.0, b + lambda - trace[t]);
    out.backlog[t + 1] = b;
  }
  for (std::size_t t = 0; t < out.backlog.size(); ++t) out.delay[t] = out.backlog[t] / lambda;
  return out;
}

void for_each_run_range(std::uint64_t runs, unsigned threads,
                        const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  const unsigned chunks =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(runs, 1024))));
  run_chunks(runs, chunks, [&](std::size_t, std::uint64_t b, std::uint64_t e) { body(b, e); });
}

namespace {

// Hit counts per (start state, level) and replica counts per start state.
struct WalkCounts {
  std::vector<std::vector<std::uint64_t>> hits;
  std::vector<std::uint64_t> runs;
};

WalkCounts delay_walks(const CapacityProcess& process, double lambda,
                       const std::vector<double>& d_grid, const SimConfig& config,
                       std::size_t states) {
  validate(config);
  if (!(lambda > 0.0)) throw DomainError("empirical_delay_tail: lambda must be positive");
  std::vector<double> levels;
  for (double d : d_grid) {
    if (!(d >= 0.0)) throw DomainError("empirical_delay_tail: d must be nonnegative");
    levels.push_back(threshold(config.event, lambda * d));
  }
  const std::size_t bins = states * (levels.size() + 1);
  WalkCounts out;
  out.hits.assign(states, std::vector<std::uint64_t>(levels.size(), 0));
  out.runs.assign(states, 0);
  if (levels.empty()) return out;
  const double top = *std::max_element(levels.begin(), levels.end());
  HitCounter counter(bins, config.runs, config.threads);
  run_chunks(config.runs, counter.threads(), [&](std::size_t k, std::uint64_t b, std::uint64_t e) {
    auto& hits = counter.chunk(k);
    for (std::uint64_t run = b; run < e; ++run) {
      SlotStream stream(process, rng::stream_key(config.seed, run));
      for (std::uint64_t t = 0; t < config.warmup; ++t) stream.next();
      const std::size_t start = states > 1 ? stream.state() : 0;
      double walk = 0.0;
      double peak = 0.0;
      for (std::uint64_t t = config.warmup; t < config.horizon; ++t) {
        walk += lambda - stream.next();
        if (walk > peak) {
          peak = walk;
          if (peak > top) break;  // every level already reached
        }
      }
      const std::size_t base = start * (levels.size() + 1);
      ++hits[base + levels.size()];
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (peak > levels[i]) ++hits[base + i];
    }
  });
  const auto total = counter.total();
  for (std::size_t st = 0; st < states; ++st) {
    const std::size_t base = st * (levels.size() + 1);
    for (std::size_t i = 0; i < levels.size(); ++i) out.hits[st][i] = total[base + i];
    out.runs[st] = total[base + levels.size()];
  }
  return out;
}

}  // namespace

std::vector<TailEstimate> empirical_delay_tail(const CapacityProcess& process, double lambda,
                                               const std::vector<double>& d_grid,
                                               const SimConfig& config) {
  const WalkCounts counts = delay_walks(process, lambda, d_grid, config, 1);
  return to_estimates(counts.hits[0], config.runs);
}

StateDelayTail empirical_delay_tail_by_state(const MarkovAdditive& process, double lambda,
                                             const std::vector<double>& d_grid,
                                             const SimConfig& config) {
  const std::size_t n = process.kernel.size();
  const CapacityProcess wrapped = process;
  const WalkCounts counts = delay_walks(wrapped, lambda, d_grid, config, n);
  StateDelayTail out;
  std::vector<std::uint64_t> all(d_grid.size(), 0);
  for (std::size_t st = 0; st < n; ++st) {
    out.by_state.push_back(to_estimates(counts.hits[st], counts.runs[st]));
    for (std::size_t i = 0; i < d_grid.size(); ++i) all[i] += counts.hits[st][i];
  }
  out.overall = to_estimates(all, config.runs);
  out.state_runs = counts.runs;
  return out;
}

TailEstimate empirical_delay_tail(const CapacityProcess& process, double lambda, double d,
                                  const SimConfig& config) {
  return empirical_delay_tail(process, lambda, std::vector<double>{d}, config).front();
}

ConvergedTail converged_delay_tail(const CapacityProcess& process, double lambda,
                                   const std::vector<double>& d_grid, SimConfig config,
                                   int max_doublings) {
  ConvergedTail out;
  auto prev = empirical_delay_tail(process, lambda, d_grid, config);
  for (int k = 0; k < max_doublings; ++k) {
    config.horizon = config.warmup + 2 * (config.horizon - config.warmup);
    auto next = empirical_delay_tail(process, lambda, d_grid, config);
    bool ok = true;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double se = std::max(next[i].std_error, 1.0 / static_cast<double>(config.runs));
      if (std::abs(next[i].point - prev[i].point) > se) ok = false;
    }
    out.estimates = next;
    out.horizon = config.horizon;
    out.converged = ok;
    if (ok) break;
    prev = std::move(next);
  }
  if (max_doublings <= 0) {
    out.estimates = prev;
    out.horizon = config.horizon;
  }
  return out;
}

std::vector<TailEstimate> feedback_queue(const CapacityProcess& process, double lambda,
                                         const std::vector<double>& d_grid,
                                         const SimConfig& config) {
  validate(config);
  if (!(lambda >= 0.0)) throw DomainError("feedback_queue: lambda must be nonnegative");
  if (lambda == 0.0) return std::vector<TailEstimate>(d_grid.size(), make_estimate(0, config.runs));
  std::vector<double> levels;
  for (double d : d_grid) levels.push_back(threshold(config.event, lambda * d));
  HitCounter counter(levels.size(), config.runs, config.threads);
  struct Segment {
    double amount;
    bool fresh;
  };
  run_chunks(config.runs, counter.threads(), [&](std::size_t k, std::uint64_t b, std::uint64_t e) {
    auto& hits = counter.chunk(k);
    std::deque<Segment> queue;
    for (std::uint64_t run = b; run < e; ++run) {
      SlotStream stream(process, rng::stream_key(config.seed, run));
      queue.clear();
      double fresh_backlog = 0.0;
      double fed_back = 0.0;
      auto push = [&](double amount, bool fresh) {
        if (amount <= 0.0) return;
        if (!queue.empty() && queue.back().fresh == fresh)
          queue.back().amount += amount;
        else
          queue.push_back({amount, fresh});
      };
      for (std::uint64_t t = 0; t < config.horizon; ++t) {
        push(fed_back, false);
        push(lambda, true);
        fresh_backlog += lambda;
        double budget = stream.next();
        double fresh_out = 0.0;
        while (budget > 0.0 && !queue.empty()) {
          Segment& head = queue.front();
          const double take = std::min(budget, head.amount);
          head.amount -= take;
          budget -= take;
          if (head.fresh) fresh_out += take;
          if (head.amount <= 1e-12 * std::max(1.0, lambda)) {
            if (head.fresh) fresh_out += head.amount;
            queue.pop_front();
          }
        }
        fresh_backlog = std::max(0.0, fresh_backlog - fresh_out);
        fed_back = fresh_out;
      }
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (fresh_backlog > levels[i]) ++hits[i];
    }
  });
  return to_estimates(counter.total(), config.runs);
}

std::vector<TailEstimate> tandem_queue(const HopChain& chain, double lambda,
                                       const std::vector<double>& d_grid,
                                       const SimConfig& config) {
  validate(config);
  chain.validate();
  if (!(lambda > 0.0)) throw DomainError("tandem_queue: lambda must be positive");
  std::vector<double> levels;
  for (double d : d_grid) levels.push_back(threshold(config.event, lambda * d));
  const double cross = (2.0 * chain.effective_k() - 2.0) * lambda;
  const std::size_t n = chain.size();
  HitCounter counter(levels.size(), config.runs, config.threads);
  run_chunks(config.runs, counter.threads(), [&](std::size_t k, std::uint64_t b, std::uint64_t e) {
    auto& hits = counter.chunk(k);
    std::vector<double> queue(n);
    std::vector<double> cap(n);
    for (std::uint64_t run = b; run < e; ++run) {
      std::vector<SlotStream> streams;
      streams.reserve(n);
      const std::size_t sources = chain.shared_channel ? 1 : n;
      for (std::size_t h = 0; h < sources; ++h)
        streams.emplace_back(chain.hops[h], rng::stream_key(hop_seed(config.seed, h), run));
      std::fill(queue.begin(), queue.end(), 0.0);
      for (std::uint64_t t = 0; t < config.horizon; ++t) {
        if (chain.shared_channel) {
          std::fill(cap.begin(), cap.end(), streams[0].next());
        } else {
          for (std::size_t h = 0; h < n; ++h) cap[h] = streams[h].next();
        }
        double input = lambda;
        for (std::size_t h = 0; h < n; ++h) {
          const double offered = std::max(0.0, cap[h] - cross);
          const double out = std::min(queue[h] + input, offered);
          queue[h] += input - out;
          input = out;
        }
      }
      double total = 0.0;
      for (double q : queue) total += q;
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (total > levels[i]) ++hits[i];
    }
  });
  return to_estimates(counter.total(), config.runs);
}

std::vector<double> sample_cumulative(const CapacityProcess& process, std::uint64_t t,
                                      const SimConfig& config) {
  if (config.runs < 1) throw ValidationError("invalid sim.runs: must be at least 1");
  if (t == 0) throw DomainError("sample_cumulative: t must be at least 1");
  std::vector<double> out(config.runs);
  for_each_run_range(config.runs, config.threads, [&](std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t run = b; run < e; ++run) {
      SlotStream stream(process, rng::stream_key(config.seed, run));
      double s = 0.0;
      for (std::uint64_t k = 0; k < t; ++k) s += stream.next();
      out[run] = s;
    }
  });
  return out;
}

TailEstimate empirical_cdf(const std::vector<double>& samples, double x) {
  std::uint64_t hits = 0;
  for (double s : samples)
    if (s <= x) ++hits;
  return make_estimate(hits, samples.size());
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    // ties: the empirical CDF jumps once past the last copy of a value
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    const double f = cdf(samples[i]);
    std::size_t first = i;
    while (first > 0 && samples[first - 1] == samples[i]) --first;
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(first) / n});
  }
  return d;
}

double ks_critical_999(std::size_t n) { return 1.9495 / std::sqrt(static_cast<double>(n)); }

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: no samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical_999(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return 1.9495 * std::sqrt((nn + mm) / (nn * mm));
}

void write_trace_dump(std::ostream& os, const CapacityProcess& process, double lambda,
                      const SimConfig& config, std::uint64_t runs) {
  validate(config);
  os << "run,slot,state,capacity,backlog\n";
  char buf[128];
  for (std::uint64_t run = 0; run < std::min(runs, config.runs); ++run) {
    SlotStream stream(process, rng::stream_key(config.seed, run));
    double b = 0.0;
    for (std::uint64_t t = 0; t < config.horizon; ++t) {
      const double c = stream.next();
      b = std::max(0.0, b + lambda - c);
      std::snprintf(buf, sizeof buf, "%llu,%llu,%zu,%.17g,%.17g\n",
                    static_cast<unsigned long long>(run), static_cast<unsigned long long>(t + 1),
                    stream.state(), c, b);
      os << buf;
    }
  }
}

}  // namespace wnc::sim
