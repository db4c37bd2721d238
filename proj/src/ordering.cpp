#include "wnc/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wnc/error.hpp"
#include "wnc/numeric.hpp"

namespace wnc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 99% DKW radius sqrt(log(2 / alpha) / (2 n)).
double dkw_radius(std::size_t n) { return std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n))); }

Verdict classify(double violation, double tol) {
  if (violation <= tol) return Verdict::yes;
  if (violation > 3.0 * tol) return Verdict::no;
  return Verdict::inconclusive;
}

// Variance of (X - t)^+ over the sample.
double stop_loss_variance(const SampleSet& s, double t, bool mirrored) {
  double m = 0.0;
  double q = 0.0;
  for (double v : s.values()) {
    const double e = mirrored ? std::max(0.0, t - v) : std::max(0.0, v - t);
    m += e;
    q += e * e;
  }
  const double n = static_cast<double>(s.size());
  m /= n;
  return std::max(0.0, q / n - m * m);
}

std::vector<double> pooled_grid(const SampleSet& x, const SampleSet& y) {
  const double lo = std::min(x.values().front(), y.values().front());
  const double hi = std::max(x.values().back(), y.values().back());
  if (!(hi > lo)) return {lo};
  return numeric::lin_space(lo, hi, 512);
}

// Largest stop-loss excess of x over y on the grid, and a 3-SE band.
struct StopLossScan {
  double violation = -kInf;
  double location = 0.0;
  double band = 0.0;
};

StopLossScan scan_stop_loss(const SampleSet& x, const SampleSet& y, bool mirrored) {
  StopLossScan out;
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  for (double t : pooled_grid(x, y)) {
    const double px = mirrored ? x.reverse_stop_loss(t) : x.stop_loss(t);
    const double py = mirrored ? y.reverse_stop_loss(t) : y.stop_loss(t);
    if (px - py > out.violation) {
      out.violation = px - py;
      out.location = t;
    }
    const double se = std::sqrt(stop_loss_variance(x, t, mirrored) / nx +
                                stop_loss_variance(y, t, mirrored) / ny);
    out.band = std::max(out.band, 3.0 * se);
  }
  return out;
}

}  // namespace

SampleSet::SampleSet(std::vector<double> values, std::string label)
    : values_(std::move(values)), label_(std::move(label)) {
  if (values_.empty()) throw ValidationError("SampleSet: no values");
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("SampleSet: non-finite value");
  std::sort(values_.begin(), values_.end());
  suffix_.assign(values_.size() + 1, 0.0);
  for (std::size_t k = values_.size(); k-- > 0;) suffix_[k] = suffix_[k + 1] + values_[k];
  mean_ = suffix_[0] / static_cast<double>(values_.size());
}

double SampleSet::variance() const {
  double acc = 0.0;
  for (double v : values_) acc += (v - mean_) * (v - mean_);
  return acc / static_cast<double>(values_.size());
}

double SampleSet::cdf(double x) const {
  const auto k = std::upper_bound(values_.begin(), values_.end(), x) - values_.begin();
  return static_cast<double>(k) / static_cast<double>(values_.size());
}

double SampleSet::stop_loss(double t) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), t) -
                                          values_.begin());
  const double above = static_cast<double>(values_.size() - k);
  return (suffix_[k] - t * above) / static_cast<double>(values_.size());
}

double SampleSet::reverse_stop_loss(double t) const {
  // E[(t - X)^+] = E[(X - t)^+] - (E[X] - t)
  return stop_loss(t) - (mean_ - t);
}

SampleSet sample_sums(const CapacityProcess& process, std::uint64_t t, const sim::SimConfig& config,
                      std::string label) {
  return SampleSet(sim::sample_cumulative(process, t, config),
                   label.empty() ? structure_name(process) : std::move(label));
}

std::string to_string(OrderRelation relation) {
  switch (relation) {
    case OrderRelation::st:
      return "st";
    case OrderRelation::cx:
      return "cx";
    case OrderRelation::icx:
      return "icx";
  }
  return "unknown";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::yes:
      return "yes";
    case Verdict::no:
      return "no";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

OrderVerdict st_order(const SampleSet& x, const SampleSet& y, std::optional<double> tol) {
  OrderVerdict out;
  out.relation = OrderRelation::st;
  out.tolerance_used = tol ? *tol : dkw_radius(x.size()) + dkw_radius(y.size());
  // F_Y - F_X only increases at points of y, so those are the candidates
  double worst = 0.0;
  std::optional<double> where;
  const auto& ys = y.values();
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (k + 1 < ys.size() && ys[k + 1] == ys[k]) continue;
    const double gap = static_cast<double>(k + 1) / static_cast<double>(ys.size()) - x.cdf(ys[k]);
    if (gap > worst) {
      worst = gap;
      where = ys[k];
    }
  }
  out.max_violation = worst;
  out.violation_location = where;
  out.holds = classify(worst, out.tolerance_used);
  return out;
}

OrderVerdict icx_order(const SampleSet& x, const SampleSet& y, std::optional<double> tol) {
  OrderVerdict out;
  out.relation = OrderRelation::icx;
  const StopLossScan s = scan_stop_loss(x, y, false);
  out.tolerance_used = tol ? *tol : s.band;
  out.max_violation = std::max(0.0, s.violation);
  if (s.violation > 0.0) out.violation_location = s.location;
  out.holds = classify(out.max_violation, out.tolerance_used);
  return out;
}

OrderVerdict cx_order(const SampleSet& x, const SampleSet& y, std::optional<double> tol) {
  OrderVerdict out;
  out.relation = OrderRelation::cx;
  const double mean_band =
      3.0 * std::sqrt(x.variance() / static_cast<double>(x.size()) +
                      y.variance() / static_cast<double>(y.size()));
  const double mean_gap = std::abs(x.mean() - y.mean());
  if (mean_gap > (tol ? *tol : std::max(mean_band, 1e-12 * std::max(1.0, std::abs(x.mean()))))) {
    out.holds = Verdict::no;
    out.max_violation = mean_gap;
    out.tolerance_used = tol ? *tol : mean_band;
    out.reason = "means differ";
    return out;
  }
  const StopLossScan up = scan_stop_loss(x, y, false);
  const StopLossScan down = scan_stop_loss(x, y, true);
  out.tolerance_used = tol ? *tol : std::max(up.band, down.band);
  const StopLossScan& worst = up.violation >= down.violation ? up : down;
  out.max_violation = std::max(0.0, worst.violation);
  if (worst.violation > 0.0) out.violation_location = worst.location;
  out.holds = classify(out.max_violation, out.tolerance_used);
  return out;
}

std::optional<double> adjustment_coefficient(const CapacityProcess& process,
                                             const ArrivalSpec& arrival) {
  validate(arrival);
  if (const auto* a = std::get_if<Additive>(&process)) {
    try {
      return lundberg_root(*a, arrival).theta_star;
    } catch (const UnstableError&) {
      return std::nullopt;
    }
  }
  if (const auto* m = std::get_if<MarkovAdditive>(&process)) {
    try {
      return lundberg_root(m->kernel, arrival).theta_star;
    } catch (const UnstableError&) {
      return std::nullopt;
    }
  }
  if (!(mean_rate(process) > arrival.lambda)) return std::nullopt;
  const double lambda = arrival.lambda;
  auto f = [&](double th) { return process_cgf(process, -th) + th * lambda; };
  // f(theta) / theta tends to lambda - (lowest long-run rate); without a
  // positive slope at infinity the walk never turns back down
  const double far = 1e6;
  const double slope = f(far) / far;
  if (slope <= 0.0) return kInf;
  // comonotonic: f(theta) = theta (lambda - min C) has no positive zero
  if (std::holds_alternative<Comonotonic>(process)) return std::nullopt;
  try {
    return convex_positive_root(f).theta_star;
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

AdjustmentOrdering adjustment_ordering(const CapacityProcess& a, const CapacityProcess& b,
                                       const ArrivalSpec& arrival, const sim::SimConfig& config,
                                       std::uint64_t probe_horizon, double tol) {
  AdjustmentOrdering out;
  out.theta_a = adjustment_coefficient(a, arrival);
  out.theta_b = adjustment_coefficient(b, arrival);
  out.cx = cx_order(sample_sums(a, probe_horizon, config), sample_sums(b, probe_horizon, config));
  std::ostringstream notes;
  if (!out.theta_a) notes << "A: no positive root; ";
  if (!out.theta_b) notes << "B: no positive root; ";
  if (out.cx.holds == Verdict::yes) {
    // a missing root means no exponential decay at all: treat it as theta = 0
    const double ta = out.theta_a.value_or(0.0);
    const double tb = out.theta_b.value_or(0.0);
    if (!out.theta_a && !out.theta_b) {
      notes << "consistent vacuously";
    } else if (ta == kInf || !(tb > ta + tol)) {
      notes << "theta_A >= theta_B as implied";
    } else {
      out.consistent = false;
      notes << "theta_B exceeds theta_A although S_A <=_cx S_B";
    }
  } else {
    notes << "antecedent " << to_string(out.cx.holds) << ": nothing to check";
  }
  out.notes = notes.str();
  return out;
}

DelayOrderingReport delay_ordering_check(const CapacityProcess& negative,
                                         const CapacityProcess& independent,
                                         const CapacityProcess& positive,
                                         const ArrivalSpec& arrival,
                                         const std::vector<double>& d_grid, sim::SimConfig config,
                                         sim::TailEvent event, double dcc_d, double dcc_epsilon) {
  validate(arrival);
  config.event = event;
  DelayOrderingReport out;
  out.d_grid = d_grid;
  out.negative = sim::empirical_delay_tail(negative, arrival.lambda, d_grid, config);
  out.independent = sim::empirical_delay_tail(independent, arrival.lambda, d_grid, config);
  out.positive = sim::empirical_delay_tail(positive, arrival.lambda, d_grid, config);
  auto below = [](const sim::TailEstimate& lo, const sim::TailEstimate& hi) {
    return lo.point <= hi.point + 3.0 * std::hypot(lo.std_error, hi.std_error);
  };
  for (std::size_t i = 0; i < d_grid.size(); ++i) {
    std::ostringstream where;
    where << "d = " << d_grid[i] << ": ";
    if (!below(out.negative[i], out.independent[i])) {
      out.chain_holds = false;
      out.violations.push_back(where.str() + "negative above independent");
    }
    if (!below(out.independent[i], out.positive[i])) {
      out.chain_holds = false;
      out.violations.push_back(where.str() + "independent above positive");
    }
  }
  auto dcc = [&](const CapacityProcess& p) -> std::optional<double> {
    try {
      return delay_constrained_capacity(p, dcc_d, dcc_epsilon).lambda_conservative;
    } catch (const ValidationError&) {
      return std::nullopt;
    }
  };
  out.dcc_negative = dcc(negative);
  out.dcc_independent = dcc(independent);
  out.dcc_positive = dcc(positive);
  const double tiny = 1e-9;
  if (out.dcc_negative && out.dcc_independent && *out.dcc_negative < *out.dcc_independent - tiny)
    out.dcc_chain_holds = false;
  if (out.dcc_independent && out.dcc_positive && *out.dcc_independent < *out.dcc_positive - tiny)
    out.dcc_chain_holds = false;
  return out;
}

}  // namespace wnc
