#include "wnc/delay.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "wnc/error.hpp"

namespace wnc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clip01(double p) { return std::clamp(p, 0.0, 1.0); }

LundbergSolution never_up() {
  LundbergSolution out;
  out.theta_star = kInf;
  out.stable = true;
  return out;
}

double markov_min_capacity(const MarkovKernel& kernel) {
  double lo = kInf;
  for (std::size_t i = 0; i < kernel.size(); ++i)
    for (std::size_t j = 0; j < kernel.size(); ++j)
      if (kernel.transition()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0)
        lo = std::min(lo, kernel.law(i, j).min_value());
  return lo;
}

BoundReport delay_report(BoundKind kind, double theta, double prefactor, double lambda, double d,
                         std::string notes) {
  BoundReport r;
  r.kind = kind;
  r.theta_star = theta;
  r.prefactor = prefactor;
  r.value = clip01(prefactor * std::exp(-theta * lambda * d));
  r.notes = std::move(notes);
  return r;
}

DelayBounds exact_pair(double value, std::string notes) {
  DelayBounds out;
  out.lower.kind = BoundKind::delay_lower;
  out.upper.kind = BoundKind::delay_upper;
  out.lower.value = out.upper.value = value;
  out.lower.notes = out.upper.notes = std::move(notes);
  return out;
}

DelayBounds vacuous_pair(std::string notes) {
  DelayBounds out;
  out.lower.kind = BoundKind::delay_lower;
  out.lower.value = 0.0;
  out.upper.kind = BoundKind::delay_upper;
  out.upper.value = 1.0;
  out.lower.notes = out.upper.notes = std::move(notes);
  return out;
}

void check_d(double d) {
  if (!(d >= 0.0) || std::isnan(d)) throw DomainError("delay bound: d must be nonnegative");
}

}  // namespace

void validate(const ArrivalSpec& arrival) {
  if (!(arrival.lambda > 0.0) || !std::isfinite(arrival.lambda))
    throw ValidationError("invalid arrival.lambda: must be positive");
}

LundbergSolution convex_positive_root(const std::function<double(double)>& f) {
  double lo = 0.0;
  double hi = 1.0;
  double fhi = f(hi);
  while (fhi <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NoExponentialMoment("lundberg_root");
    fhi = f(hi);
  }
  double flo = lo > 0.0 ? f(lo) : 0.0;
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double fm = f(mid);
    if (std::isnan(fm)) throw NumericError("lundberg_root", "NaN cumulant");
    if (fm > 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  LundbergSolution out;
  out.stable = true;
  // lo = 0 is the trivial root; prefer hi there
  if (lo > 0.0 && std::abs(flo) < std::abs(fhi)) {
    out.theta_star = lo;
    out.kappa_residual = flo;
  } else {
    out.theta_star = hi;
    out.kappa_residual = fhi;
  }
  if (!(std::abs(out.kappa_residual) < 1e-9))
    throw NumericError("lundberg_root", "residual " + std::to_string(out.kappa_residual) +
                                            " above 1e-9");
  return out;
}

double stability_margin(const CapacityProcess& process, const ArrivalSpec& arrival) {
  return mean_rate(process) - arrival.lambda;
}

LundbergSolution lundberg_root(const Additive& process, const ArrivalSpec& arrival,
                               double offset_multiplier) {
  validate(arrival);
  const double rate = offset_multiplier * arrival.lambda;
  if (!(process.marginal.mean() > rate))
    throw UnstableError("no positive root: system unstable");
  if (process.marginal.min_value() >= rate) return never_up();
  const CapacityLaw& law = process.marginal;
  return convex_positive_root([&](double theta) { return law.cgf(-theta) + theta * rate; });
}

LundbergSolution lundberg_root(const MarkovKernel& kernel, const ArrivalSpec& arrival,
                               double offset_multiplier) {
  validate(arrival);
  const double rate = offset_multiplier * arrival.lambda;
  if (!(kernel.mean_increment() > rate)) throw UnstableError("no positive root: system unstable");
  if (markov_min_capacity(kernel) >= rate) return never_up();
  return convex_positive_root(
      [&](double theta) { return markov_spectral(kernel, -theta).log_eigenvalue + theta * rate; });
}

CramerPrefactors cramer_prefactors(const DiscreteDistribution& capacity, double lambda,
                                   double theta) {
  // increment atoms y = lambda - c in increasing order
  const auto& c = capacity.support();
  const auto& m = capacity.mass();
  std::vector<double> y;
  std::vector<double> w;
  for (std::size_t k = c.size(); k-- > 0;)
    if (m[k] > 0.0) {
      y.push_back(lambda - c[k]);
      w.push_back(m[k]);
    }
  const double x0 = y.back();
  CramerPrefactors out;
  if (!(x0 > 0.0)) return out;
  // Suffix sums over atoms above a cut: mass and sum w e^{theta (y - y_top)}.
  const std::size_t n = y.size();
  std::vector<double> mass_above(n + 1, 0.0);
  std::vector<double> mgf_above(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    mass_above[k] = mass_above[k + 1] + w[k];
    mgf_above[k] = mgf_above[k + 1] + w[k] * std::exp(theta * (y[k] - x0));
  }
  // On a segment [l, r) of x with no atom inside, the atoms above x are fixed
  // and the ratio  mass / sum w e^{theta (y - x)}  grows like e^{theta x}:
  // the infimum sits at l and the supremum at r.
  std::vector<double> cuts{0.0};
  for (double v : y)
    if (v > 0.0 && v < x0) cuts.push_back(v);
  cuts.push_back(x0);
  double lo = kInf;
  double hi = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double l = cuts[s];
    const double r = cuts[s + 1];
    const auto first = static_cast<std::size_t>(std::upper_bound(y.begin(), y.end(), l) - y.begin());
    if (first >= n) continue;
    // ratio(x) = mass / (e^{theta (x0 - x)} mgf)
    const double mass = mass_above[first];
    const double mgf = mgf_above[first];
    lo = std::min(lo, mass / (std::exp(theta * (x0 - l)) * mgf));
    hi = std::max(hi, mass / (std::exp(theta * (x0 - r)) * mgf));
  }
  out.c_minus = std::min(lo, 1.0);
  out.c_plus = std::min(hi, 1.0);
  return out;
}

DelayBounds delay_tail_additive(const Additive& process, const ArrivalSpec& arrival, double d,
                                double offset_multiplier) {
  validate(arrival);
  check_d(d);
  const double rate = offset_multiplier * arrival.lambda;
  if (process.marginal.min_value() >= rate && process.marginal.mean() > rate)
    return exact_pair(d > 0.0 ? 0.0 : 1.0, "capacity never below the arrival rate");
  if (!(process.marginal.mean() > rate))
    return vacuous_pair("zero or negative stability margin: vacuous bound");
  const LundbergSolution root = lundberg_root(process, arrival, offset_multiplier);
  const CramerPrefactors pre =
      cramer_prefactors(process.marginal.discretized(), rate, root.theta_star);
  DelayBounds out;
  out.theta_star = root.theta_star;
  out.c_minus = pre.c_minus;
  out.c_plus = pre.c_plus;
  out.lower = delay_report(BoundKind::delay_lower, root.theta_star, pre.c_minus, arrival.lambda, d,
                           "additive Lundberg bound, C- prefactor");
  out.upper = delay_report(BoundKind::delay_upper, root.theta_star, pre.c_plus, arrival.lambda, d,
                           "additive Lundberg bound, C+ prefactor");
  return out;
}

MarkovDelayBounds delay_tail_markov(const MarkovAdditive& process, const ArrivalSpec& arrival,
                                    double d, std::optional<std::size_t> initial_state,
                                    double offset_multiplier) {
  validate(arrival);
  check_d(d);
  const MarkovKernel& kernel = process.kernel;
  const std::size_t n = kernel.size();
  const std::optional<std::size_t> start = initial_state ? initial_state : process.initial_state;
  if (start && *start >= n) throw ValidationError("initial state out of range");
  const double rate = offset_multiplier * arrival.lambda;
  const Eigen::VectorXd& pi = kernel.stationary();
  MarkovDelayBounds out;
  auto fill_constant = [&](double value, const std::string& notes) {
    out.state_lower.assign(n, value);
    out.state_upper.assign(n, value);
    out.stationary_lower = out.stationary_upper = value;
    out.h = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    out.report = exact_pair(value, notes);
  };
  if (!(kernel.mean_increment() > rate)) {
    out.state_lower.assign(n, 0.0);
    out.state_upper.assign(n, 1.0);
    out.stationary_lower = 0.0;
    out.stationary_upper = 1.0;
    out.h = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    out.report = vacuous_pair("zero or negative stability margin: vacuous bound");
    return out;
  }
  if (markov_min_capacity(kernel) >= rate) {
    fill_constant(d > 0.0 ? 0.0 : 1.0, "capacity never below the arrival rate");
    return out;
  }
  const LundbergSolution root = lundberg_root(kernel, arrival, offset_multiplier);
  const double theta = root.theta_star;
  out.theta_star = theta;
  const SpectralData spec = markov_spectral(kernel, -theta);
  out.h = spec.right;
  const double hmin = out.h.minCoeff();
  const double hmax = out.h.maxCoeff();
  const double decay = std::exp(-theta * arrival.lambda * d);
  out.state_lower.resize(n);
  out.state_upper.resize(n);
  out.stationary_lower = 0.0;
  out.stationary_upper = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = out.h(static_cast<Eigen::Index>(i));
    out.state_lower[i] = clip01(hi / hmax * decay);
    out.state_upper[i] = clip01(hi / hmin * decay);
    out.stationary_lower += pi(static_cast<Eigen::Index>(i)) * out.state_lower[i];
    out.stationary_upper += pi(static_cast<Eigen::Index>(i)) * out.state_upper[i];
  }
  double plain_lower_pref = start ? out.h(static_cast<Eigen::Index>(*start)) / hmax : 0.0;
  double plain_upper_pref = start ? out.h(static_cast<Eigen::Index>(*start)) / hmin : 0.0;
  if (!start)
    for (std::size_t i = 0; i < n; ++i) {
      plain_lower_pref += pi(static_cast<Eigen::Index>(i)) * out.h(static_cast<Eigen::Index>(i)) / hmax;
      plain_upper_pref += pi(static_cast<Eigen::Index>(i)) * out.h(static_cast<Eigen::Index>(i)) / hmin;
    }
  DelayBounds rep;
  rep.theta_star = theta;
  rep.lower = delay_report(BoundKind::delay_lower, theta, plain_lower_pref, arrival.lambda, d,
                           "Markov bound h(i) / max h");
  rep.upper = delay_report(BoundKind::delay_upper, theta, plain_upper_pref, arrival.lambda, d,
                           "Markov bound h(i) / min h");
  rep.c_minus = plain_lower_pref;
  rep.c_plus = plain_upper_pref;
  if (!start) {
    // mixing the clipped state bounds is tighter than clipping the mixture
    rep.lower.value = out.stationary_lower;
    rep.upper.value = out.stationary_upper;
    rep.lower.notes += ", pi-mixture";
    rep.upper.notes += ", pi-mixture";
  }

  if (kernel.increments_independent_of_destination()) {
    // increment law depends only on the state the step leaves
    double cm = kInf;
    double cp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const CramerPrefactors pj = cramer_prefactors(kernel.law(j, j).discretized(), rate, theta);
      const double hj = out.h(static_cast<Eigen::Index>(j));
      cm = std::min(cm, pj.c_minus / hj);
      cp = std::max(cp, pj.c_plus / hj);
    }
    out.improved = true;
    out.improved_c_minus = cm;
    out.improved_c_plus = cp;
    out.improved_state_lower.resize(n);
    out.improved_state_upper.resize(n);
    out.improved_stationary_lower = 0.0;
    out.improved_stationary_upper = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double hi = out.h(static_cast<Eigen::Index>(i));
      out.improved_state_lower[i] = clip01(cm * hi * decay);
      out.improved_state_upper[i] = clip01(cp * hi * decay);
      out.improved_stationary_lower += pi(static_cast<Eigen::Index>(i)) * out.improved_state_lower[i];
      out.improved_stationary_upper += pi(static_cast<Eigen::Index>(i)) * out.improved_state_upper[i];
    }
    double h_start = 0.0;
    if (start) {
      h_start = out.h(static_cast<Eigen::Index>(*start));
    } else {
      h_start = pi.dot(out.h);
    }
    if (n == 1) h_start = 1.0;
    const BoundReport il = delay_report(BoundKind::delay_lower, theta, cm * h_start, arrival.lambda,
                                        d, "Markov bound, improved C- prefactor");
    const BoundReport iu = delay_report(BoundKind::delay_upper, theta, cp * h_start, arrival.lambda,
                                        d, "Markov bound, improved C+ prefactor");
    if (iu.value <= rep.upper.value) {
      rep.upper = iu;
      rep.c_plus = cp * h_start;
    }
    // the plain lower bound assumes no overshoot; a single state has its exact C-
    if (n == 1 || il.value >= rep.lower.value) {
      rep.lower = il;
      rep.c_minus = cm * h_start;
    }
  }
  out.report = rep;
  return out;
}

BoundReport delay_tail_comonotonic(const Comonotonic& process, const ArrivalSpec& arrival,
                                   double d, std::optional<double> horizon) {
  validate(arrival);
  check_d(d);
  BoundReport r;
  r.kind = BoundKind::delay_upper;
  r.prefactor = 1.0;
  if (!horizon) {
    r.value = process.marginal.cdf_left(arrival.lambda);
    r.notes = "comonotonic: P(C < lambda), every d > 0";
    return r;
  }
  if (!(*horizon >= 1.0)) throw DomainError("delay_tail_comonotonic: horizon must be at least 1");
  r.horizon = *horizon;
  const double arg = arrival.lambda - arrival.lambda * d / *horizon;
  r.value = arg <= 0.0 ? 0.0 : process.marginal.cdf_left(arg);
  r.notes = "comonotonic: P(C < lambda - lambda d / t)";
  return r;
}

DelayBounds delay_tail(const CapacityProcess& process, const ArrivalSpec& arrival, double d,
                       std::optional<double> horizon) {
  if (const auto* a = std::get_if<Additive>(&process)) return delay_tail_additive(*a, arrival, d);
  if (const auto* m = std::get_if<MarkovAdditive>(&process))
    return delay_tail_markov(*m, arrival, d).report;
  if (const auto* c = std::get_if<Comonotonic>(&process)) {
    const BoundReport r = delay_tail_comonotonic(*c, arrival, d, horizon);
    DelayBounds out = exact_pair(r.value, r.notes);
    out.lower.horizon = out.upper.horizon = r.horizon;
    return out;
  }
  throw ValidationError("delay bounds: no analytic delay bound for the antithetic structure");
}

DelayBounds backlog_tail(const CapacityProcess& process, const ArrivalSpec& arrival, double x,
                         std::optional<double> horizon) {
  validate(arrival);
  if (!(x >= 0.0)) throw DomainError("backlog_tail: x must be nonnegative");
  return delay_tail(process, arrival, x / arrival.lambda, horizon);
}

DelayConstrainedCapacity delay_constrained_capacity(const CapacityProcess& process, double d,
                                                    double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("delay_constrained_capacity: epsilon must lie in (0, 1)");
  if (!(d > 0.0)) throw DomainError("delay_constrained_capacity: d must be positive");
  if (std::holds_alternative<Antithetic>(process))
    throw ValidationError("delay_constrained_capacity: no analytic delay bound for antithetic");
  DelayConstrainedCapacity out;
  const double mean = mean_rate(process);
  double floor_c = kInf;
  if (const auto* a = std::get_if<Additive>(&process)) floor_c = a->marginal.min_value();
  if (const auto* m = std::get_if<MarkovAdditive>(&process)) floor_c = markov_min_capacity(m->kernel);
  if (const auto* c = std::get_if<Comonotonic>(&process)) floor_c = c->marginal.min_value();
  if (floor_c >= mean) {
    // deterministic capacity: no queueing at any rate below it
    out.lambda_conservative = out.lambda_optimistic = mean;
    out.one_shot_lower = out.one_shot_upper = mean;
    out.notes = "deterministic capacity";
    return out;
  }
  if (const auto* c = std::get_if<Comonotonic>(&process)) {
    // infinite-horizon tail P(C < lambda) is independent of d
    const double lam = c->marginal.quantile(epsilon);
    const double v = c->marginal.cdf_left(lam) <= epsilon ? lam : 0.0;
    out.lambda_conservative = out.lambda_optimistic = v;
    out.one_shot_lower = out.one_shot_upper = v;
    out.feasible = v > 0.0;
    out.notes = "comonotonic: largest lambda with P(C < lambda) <= epsilon";
    return out;
  }
  auto bounds_at = [&](double lambda) { return delay_tail(process, ArrivalSpec{lambda}, d); };
  // largest lambda in (0, mean) where pick(bounds) <= epsilon, assuming monotone growth in lambda
  auto largest = [&](bool upper) {
    auto ok = [&](double lambda) {
      const DelayBounds b = bounds_at(lambda);
      return (upper ? b.upper.value : b.lower.value) <= epsilon;
    };
    double lo = 0.0;
    double hi = mean;
    double probe = mean * 1e-6;
    if (!ok(probe)) {
      return 0.0;
    }
    lo = probe;
    for (int iter = 0; iter < 60 && hi - lo > 1e-10 * mean; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (ok(mid))
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  };
  out.lambda_conservative = largest(true);
  out.lambda_optimistic = largest(false);
  out.feasible = out.lambda_conservative > 0.0;
  std::ostringstream notes;
  notes << "conservative: upper delay bound <= epsilon; optimistic: lower delay bound <= epsilon";
  if (out.lambda_conservative > out.lambda_optimistic * (1.0 + 1e-9)) {
    notes << "; warning: conservative exceeds optimistic";
  }
  if (!out.feasible) notes << "; no feasible rate";
  if (out.feasible) {
    const DelayBounds b = bounds_at(out.lambda_conservative);
    if (b.theta_star > 0.0 && std::isfinite(b.theta_star)) {
      out.one_shot_lower = -std::log(epsilon / b.c_minus) / (b.theta_star * d);
      out.one_shot_upper = -std::log(epsilon / b.c_plus) / (b.theta_star * d);
    }
  }
  out.notes = notes.str();
  return out;
}

ChebyshevBound chebyshev_transient(const CapacityProcess& process, std::uint64_t t, double x,
                                   const sim::SimConfig& config) {
  if (!(x > 0.0)) throw DomainError("chebyshev_transient: x must be positive");
  if (t == 0) throw DomainError("chebyshev_transient: t must be at least 1");
  ChebyshevBound out;
  if (const auto* a = std::get_if<Additive>(&process)) {
    out.variance = a->marginal.variance() / static_cast<double>(t);
    out.ci_low = out.ci_high = out.variance;
    out.bound = out.variance / (x * x);
    return out;
  }
  const std::vector<double> s = sim::sample_cumulative(process, t, config);
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double v : s) mean += v / static_cast<double>(t);
  mean /= n;
  double ss = 0.0;
  for (double v : s) {
    const double c = v / static_cast<double>(t) - mean;
    ss += c * c;
  }
  out.estimated = true;
  out.variance = s.size() > 1 ? ss / (n - 1.0) : 0.0;
  if (s.size() > 1 && out.variance > 0.0) {
    boost::math::chi_squared chi(n - 1.0);
    out.ci_low = ss / boost::math::quantile(chi, 0.995);
    out.ci_high = ss / boost::math::quantile(chi, 0.005);
  } else {
    out.ci_low = out.ci_high = out.variance;
  }
  out.bound = out.variance / (x * x);
  return out;
}

}  // namespace wnc
