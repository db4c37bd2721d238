#include "wnc/interference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wnc/error.hpp"

namespace wnc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BivariateTrace::BivariateTrace(std::size_t horizon)
    : horizon_(horizon), values_((horizon + 1) * (horizon + 2) / 2, 0.0) {}

std::size_t BivariateTrace::index(std::size_t s, std::size_t t) const {
  if (s > t || t > horizon_) throw DomainError("BivariateTrace: need s <= t <= horizon");
  // row s holds t = s..horizon
  return s * (2 * horizon_ + 3 - s) / 2 + (t - s);
}

double BivariateTrace::operator()(std::size_t s, std::size_t t) const { return values_[index(s, t)]; }

void BivariateTrace::set(std::size_t s, std::size_t t, double v) { values_[index(s, t)] = v; }

BivariateTrace BivariateTrace::from_cumulative(const std::vector<double>& cumulative) {
  if (cumulative.empty()) throw ValidationError("BivariateTrace: empty cumulative path");
  BivariateTrace out(cumulative.size() - 1);
  for (std::size_t s = 0; s < cumulative.size(); ++s)
    for (std::size_t t = s; t < cumulative.size(); ++t) out.set(s, t, cumulative[t] - cumulative[s]);
  return out;
}

BivariateTrace BivariateTrace::constant_rate(std::size_t horizon, double c) {
  BivariateTrace out(horizon);
  for (std::size_t s = 0; s <= horizon; ++s)
    for (std::size_t t = s; t <= horizon; ++t) out.set(s, t, c * static_cast<double>(t - s));
  return out;
}

BivariateTrace minplus_convolve(const BivariateTrace& f, const BivariateTrace& g) {
  if (f.horizon() != g.horizon())
    throw ValidationError("minplus_convolve: traces have different horizons");
  const std::size_t h = f.horizon();
  BivariateTrace out(h);
  for (std::size_t s = 0; s <= h; ++s)
    for (std::size_t t = s; t <= h; ++t) {
      double best = kInf;
      for (std::size_t u = s; u <= t; ++u) best = std::min(best, f(s, u) + g(u, t));
      out.set(s, t, best);
    }
  return out;
}

BivariateTrace single_hop_leftover(const BivariateTrace& service,
                                   const std::vector<double>& arrivals) {
  if (arrivals.size() != service.horizon() + 1)
    throw ValidationError("single_hop_leftover: arrival path length must be horizon + 1");
  BivariateTrace out(service.horizon());
  for (std::size_t s = 0; s <= service.horizon(); ++s)
    for (std::size_t t = s; t <= service.horizon(); ++t)
      out.set(s, t, std::max(0.0, service(s, t) - (arrivals[t] - arrivals[s])));
  return out;
}

bool is_subadditive(const BivariateTrace& service, double tol) {
  const std::size_t h = service.horizon();
  for (std::size_t s = 0; s <= h; ++s)
    for (std::size_t u = s; u <= h; ++u)
      for (std::size_t t = u; t <= h; ++t)
        if (service(s, t) > service(s, u) + service(u, t) + tol) return false;
  return true;
}

FeedbackBound feedback_delay_additive(const Additive& process, const ArrivalSpec& arrival,
                                      double d, double multiplier) {
  validate(arrival);
  if (!(process.marginal.mean() > multiplier * arrival.lambda))
    throw UnstableError("feedback-unstable: " + std::to_string(multiplier) +
                        " lambda is not below the mean capacity");
  const DelayBounds b = delay_tail_additive(process, arrival, d, multiplier);
  FeedbackBound out;
  out.theta_star = b.theta_star;
  out.improved = b.upper;
  out.report = b.upper;
  out.report.prefactor = 1.0;
  if (std::isfinite(b.theta_star))
    out.report.value = std::min(1.0, std::exp(-b.theta_star * arrival.lambda * d));
  out.report.notes = "feedback Lundberg bound, prefactor 1";
  return out;
}

FeedbackBound feedback_delay_markov(const MarkovAdditive& process, const ArrivalSpec& arrival,
                                    double d, std::optional<std::size_t> initial_state,
                                    double multiplier) {
  validate(arrival);
  if (!(process.kernel.mean_increment() > multiplier * arrival.lambda))
    throw UnstableError("feedback-unstable: " + std::to_string(multiplier) +
                        " lambda is not below the stationary mean capacity");
  const MarkovDelayBounds b = delay_tail_markov(process, arrival, d, initial_state, multiplier);
  const auto start = initial_state ? initial_state : process.initial_state;
  FeedbackBound out;
  out.theta_star = b.theta_star;
  out.report.kind = BoundKind::delay_upper;
  out.report.theta_star = b.theta_star;
  out.report.value = start ? b.state_upper[*start] : b.stationary_upper;
  out.report.prefactor = start ? b.h(static_cast<Eigen::Index>(*start)) / b.h.minCoeff()
                               : process.kernel.stationary().dot(b.h) / b.h.minCoeff();
  out.report.notes = start ? "feedback Markov bound h(i) / min h" : "feedback Markov bound, pi-mixture";
  out.improved = b.report.upper;
  return out;
}

MultihopService multihop_service_bound(const HopChain& chain, const ArrivalSpec& arrival) {
  chain.validate();
  validate(arrival);
  MultihopService out;
  out.shared = chain.shared_channel;
  out.multiplier = chain.interference_multiplier();
  std::ostringstream notes;
  notes << "K_eff = " << chain.effective_k() << ", arrival multiplier " << out.multiplier;
  if (chain.shared_channel) {
    out.collapsed = chain.hops.front();
    notes << "; shared channel collapses to one hop (cumulative capacity is additive, hence "
             "subadditive)";
  } else {
    out.hops = chain.hops;
  }
  out.notes = notes.str();
  return out;
}

DelayBounds multihop_delay_bound(const HopChain& chain, const ArrivalSpec& arrival, double d) {
  const MultihopService svc = multihop_service_bound(chain, arrival);
  if (svc.shared) {
    const CapacityProcess& p = *svc.collapsed;
    if (const auto* a = std::get_if<Additive>(&p))
      return delay_tail_additive(*a, arrival, d, svc.multiplier);
    if (const auto* m = std::get_if<MarkovAdditive>(&p))
      return delay_tail_markov(*m, arrival, d, std::nullopt, svc.multiplier).report;
    throw ValidationError("multihop_delay_bound: shared channel needs an additive or Markov hop");
  }
  const E2EBound e = e2e_delay_bound_optimized(chain, arrival, d);
  DelayBounds out;
  out.upper = e.report;
  out.lower.kind = BoundKind::delay_lower;
  out.lower.value = 0.0;
  out.lower.notes = "no lower bound for separate channels";
  out.theta_star = e.report.theta_star.value_or(0.0);
  return out;
}

E2EBound e2e_delay_bound(const HopChain& chain, const ArrivalSpec& arrival, double d, double theta,
                         std::size_t t_max, double eps_tail) {
  chain.validate();
  validate(arrival);
  if (!(theta > 0.0)) throw DomainError("e2e_delay_bound: theta must be positive");
  if (!(d >= 0.0)) throw DomainError("e2e_delay_bound: d must be nonnegative");
  const double lambda = arrival.lambda;
  const double load = chain.interference_multiplier() * lambda + lambda;
  std::vector<double> rho;
  for (const auto& hop : chain.hops) {
    const auto* a = std::get_if<Additive>(&hop);
    if (a == nullptr) throw ValidationError("e2e_delay_bound: every hop must be additive");
    const double k = a->marginal.cgf(-theta);
    if (!std::isfinite(k)) throw NoExponentialMoment("e2e_delay_bound");
    rho.push_back(std::exp(k + theta * load));
  }
  E2EBound out;
  out.report.kind = BoundKind::delay_upper;
  out.report.theta_star = theta;
  const double front = std::exp(-theta * lambda * d);
  auto diverged = [&](std::size_t terms) {
    out.diverged = true;
    out.terms = terms;
    out.report.value = 1.0;
    out.report.prefactor = kInf;
    out.report.notes = "bound diverges at this theta";
    return out;
  };
  for (double r : rho)
    if (!(r < 1.0)) return diverged(0);

  // g[i] = sum over segmentations of [0, t] into i + 1 pieces; advancing t:
  // g_i(t) = g_{i-1}(t) + rho_i g_i(t - 1)
  const std::size_t n = rho.size();
  std::vector<double> g(n, 0.0);
  double total = 0.0;
  double prev = 0.0;
  std::size_t quiet = 0;
  for (std::size_t t = 0; t < t_max; ++t) {
    double below = t == 0 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = below + rho[i] * g[i];
      below = g[i];
    }
    const double term = g[n - 1];
    total += term;
    const double ratio = prev > 0.0 ? term / prev : 0.0;
    prev = term;
    quiet = (term < eps_tail * total) ? quiet + 1 : 0;
    if (quiet >= 50 && ratio < 1.0) {
      // terms form a log-concave sequence, so later ratios do not exceed this one
      out.terms = t + 1;
      out.tail_mass = term * ratio / (1.0 - ratio);
      total += out.tail_mass;
      out.report.prefactor = total;
      out.report.value = std::min(1.0, front * total);
      out.report.notes = "segmentation sum over " + std::to_string(out.terms) + " terms";
      return out;
    }
  }
  return diverged(t_max);
}

E2EBound e2e_delay_bound_optimized(const HopChain& chain, const ArrivalSpec& arrival, double d,
                                   const ThetaGrid& grid) {
  auto log_bound = [&](double th) {
    try {
      const E2EBound e = e2e_delay_bound(chain, arrival, d, th);
      if (e.diverged) return kInf;
      return std::log(e.report.prefactor) - th * arrival.lambda * d;
    } catch (const NumericError&) {
      return kInf;
    }
  };
  // rho_i < 1 exactly below the Lundberg root of hop i at load 2 K_eff lambda
  chain.validate();
  double hi = grid.cap;
  try {
    for (const auto& hop : chain.hops) {
      const auto* a = std::get_if<Additive>(&hop);
      if (a == nullptr) throw ValidationError("e2e_delay_bound: every hop must be additive");
      hi = std::min(hi, lundberg_root(*a, arrival, chain.interference_multiplier() + 1.0).theta_star);
    }
  } catch (const UnstableError&) {
    hi = 0.0;
  }
  hi *= 1.0 - 1e-9;
  const ThetaOptimum best = hi > grid.lo ? minimize_over_theta(log_bound, grid, hi) : ThetaOptimum{0.0, kInf};
  if (!std::isfinite(best.value)) {
    E2EBound out;
    out.diverged = true;
    out.report.kind = BoundKind::delay_upper;
    out.report.value = 1.0;
    out.report.notes = "bound diverges for every theta on the grid";
    return out;
  }
  return e2e_delay_bound(chain, arrival, d, best.theta);
}

}  // namespace wnc
