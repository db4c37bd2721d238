#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wnc/error.hpp"
#include "wnc/interference.hpp"
#include "wnc/ordering.hpp"

namespace wnc::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct QueryRef {
  std::string id;  // index in the scenario, or "default"
  const json& params;
  std::string path;
};

std::string label(const char* quantity, const std::string& tag) {
  return tag.empty() ? quantity : std::string(quantity) + "[" + tag + "]";
}

std::optional<CapacityLaw> marginal_of(const CapacityProcess& p) {
  if (const auto* a = std::get_if<Additive>(&p)) return a->marginal;
  if (const auto* c = std::get_if<Comonotonic>(&p)) return c->marginal;
  if (const auto* n = std::get_if<Antithetic>(&p)) return n->marginal;
  return std::nullopt;
}

std::string state_label(const MarkovKernel& k, std::size_t i) {
  return k.states().empty() ? "state" + std::to_string(i) : k.states()[i];
}

std::vector<double> one_to(int n) {
  std::vector<double> out;
  for (int i = 1; i <= n; ++i) out.push_back(i);
  return out;
}

std::uint64_t slots(double v, const std::string& path) {
  if (!(v >= 1.0) || v != std::floor(v)) throw ValidationError(path + ": expected a positive integer");
  return static_cast<std::uint64_t>(v);
}

class Emitter {
 public:
  Emitter(Context& ctx, const QueryRef& q, std::string kind) : ctx_(ctx), q_(q), kind_(std::move(kind)) {}

  Row& add(std::string quantity, std::optional<double> argument, double value) {
    Row r;
    r.query = q_.id;
    r.kind = kind_;
    r.quantity = std::move(quantity);
    r.argument = argument;
    r.value = value;
    ctx_.rows.push_back(std::move(r));
    return ctx_.rows.back();
  }

  Row& bound(std::string quantity, double argument, const BoundReport& b) {
    Row& r = add(std::move(quantity), argument, b.value);
    r.theta_star = b.theta_star;
    r.prefactor = b.prefactor;
    r.horizon = b.horizon;
    r.notes = b.notes;
    return r;
  }

  Row& estimate(std::string quantity, double argument, const sim::TailEstimate& e) {
    Row& r = add(std::move(quantity), argument, e.point);
    std::ostringstream os;
    os << "std_error " << format_number(e.std_error) << ", runs " << e.runs_used;
    r.notes = os.str();
    return r;
  }

  /// Records a checked Monte Carlo row: lo <= value <= hi within three
  /// standard errors, where the error at each side is the larger of the
  /// empirical one and the binomial one at that bound (a zero count is
  /// consistent with any bound the runs cannot resolve).
  void check(Row& r, double lo, double hi, const sim::TailEstimate& est) {
    const double n = static_cast<double>(std::max<std::uint64_t>(est.runs_used, 1));
    auto se_at = [&](double p) {
      const double q = std::clamp(p, 0.0, 1.0);
      return std::max(est.std_error, std::sqrt(q * (1.0 - q) / n));
    };
    const double tol = 1e-12;
    const bool pass = r.value >= lo - 3.0 * se_at(lo) - tol && r.value <= hi + 3.0 * se_at(hi) + tol;
    r.check = pass ? "pass" : "fail";
    ++ctx_.checks;
    if (!pass) ++ctx_.failed_checks;
  }

  void check_flag(Row& r, bool pass) {
    r.check = pass ? "pass" : "fail";
    ++ctx_.checks;
    if (!pass) ++ctx_.failed_checks;
  }

  void unstable(const std::string& quantity, std::optional<double> argument, const std::string& why) {
    Row& r = add(quantity, argument, 1.0);
    r.notes = why;
    ctx_.hard_failure = true;
  }

  void mark_hard_failure() { ctx_.hard_failure = true; }

  const Scenario& scenario() const { return ctx_.scenario; }
  const json& params() const { return q_.params; }
  const std::string& path() const { return q_.path; }

 private:
  Context& ctx_;
  const QueryRef& q_;
  std::string kind_;
};

const std::vector<double> kDefaultD{1, 2, 5, 10, 20};

// capacity tables of the channel, or of each state of a Markov kernel
void capacity_query(Emitter& e) {
  std::vector<std::pair<std::string, CapacityLaw>> laws;
  if (const auto* m = std::get_if<MarkovAdditive>(&e.scenario().process)) {
    const auto& k = m->kernel;
    for (std::size_t i = 0; i < k.laws().size(); ++i)
      laws.emplace_back(k.attachment() == Attachment::transition ? "law" + std::to_string(i) : state_label(k, i),
                        k.laws()[i]);
  } else {
    laws.emplace_back("", *e.scenario().channel);
  }
  const auto xs = get_numbers(e.params(), "x_bits_per_slot", {0, 0.5, 1, 2, 4}, e.path());
  const auto ps = get_numbers(e.params(), "probability", {0.01, 0.1, 0.5, 0.9, 0.99}, e.path());
  const auto thetas = get_numbers(e.params(), "theta", {-1, -0.5, 0.5, 1}, e.path());
  for (const auto& [tag, law] : laws) {
    e.add(label("mean", tag), std::nullopt, law.mean());
    e.add(label("variance", tag), std::nullopt, law.variance());
    for (double x : xs) {
      e.add(label("cdf", tag), x, law.cdf(x));
      e.add(label("tail", tag), x, law.tail(x));
    }
    for (double p : ps) e.add(label("quantile", tag), p, law.quantile(p));
    for (double th : thetas) e.add(label("cgf", tag), th, law.cgf(th));
  }
}

// cumulative capacity sandwiches
void bounds_query(Emitter& e, bool force_mc) {
  const auto& process = e.scenario().process;
  const bool mc = force_mc || get_bool(e.params(), "mc", false, e.path());
  const double mean = mean_rate(process);
  const auto marginal = marginal_of(process);
  for (double tv : get_numbers(e.params(), "t_slots", {1, 4, 16}, e.path())) {
    const std::uint64_t t = slots(tv, e.path() + ".t_slots");
    std::vector<double> xs = get_numbers(e.params(), "x_bits_per_slot", {}, e.path());
    if (xs.empty())
      for (double f : {0.5, 0.8, 1.0, 1.2}) xs.push_back(f * mean * static_cast<double>(t));
    std::vector<double> samples;
    if (mc) samples = sim::sample_cumulative(process, t, e.scenario().sim);
    for (double x : xs) {
      double lo = 0.0, hi = 1.0;
      auto keep = [&](Row& r, bool lower) {
        r.horizon = static_cast<double>(t);
        if (lower) lo = std::max(lo, r.value); else hi = std::min(hi, r.value);
      };
      if (const auto* a = std::get_if<Additive>(&process)) {
        const auto [l, u] = additive_cdf_bounds(*a, t, x);
        keep(e.bound("cdf_lower", x, l), true);
        keep(e.bound("cdf_upper", x, u), false);
      } else if (const auto* m = std::get_if<MarkovAdditive>(&process)) {
        const auto [l, u] = markov_cdf_bounds(*m, t, x);
        keep(e.bound("cdf_lower", x, l), true);
        keep(e.bound("cdf_upper", x, u), false);
      } else if (const auto* c = std::get_if<Comonotonic>(&process)) {
        Row& r = e.add("cdf_exact", x, comonotonic_cdf(*c, t, x));
        keep(r, true);
        keep(r, false);
      }
      if (marginal && t <= 8) {
        const auto f = frechet_bounds(std::vector<CapacityLaw>(t, *marginal), x);
        keep(e.add("frechet_lower", x, f.lower), true);
        keep(e.add("frechet_upper", x, f.upper), false);
      }
      if (mc) {
        const auto est = sim::empirical_cdf(samples, x);
        Row& r = e.estimate("mc_cdf", x, est);
        r.horizon = static_cast<double>(t);
        e.check(r, lo, hi, est);
      }
    }
  }
}

struct DelayRow {
  double lower = 0.0;
  double upper = 1.0;
};

// analytic delay rows for the scenario process; returns the reported pair
std::optional<DelayRow> delay_rows(Emitter& e, const CapacityProcess& process, double d,
                                   std::optional<double> horizon, const std::string& tag) {
  const ArrivalSpec& arrival = e.scenario().arrival;
  if (!std::holds_alternative<Comonotonic>(process) && stability_margin(process, arrival) <= 0.0)
    e.mark_hard_failure();  // the bounds below are vacuous
  try {
    if (const auto* m = std::get_if<MarkovAdditive>(&process)) {
      const auto b = delay_tail_markov(*m, arrival, d);
      e.bound(label("delay_lower", tag), d, b.report.lower);
      e.bound(label("delay_upper", tag), d, b.report.upper);
      for (std::size_t i = 0; i < m->kernel.size(); ++i) {
        const std::string s = state_label(m->kernel, i);
        Row& lo = e.add(label("delay_lower", s), d, b.state_lower[i]);
        lo.theta_star = b.theta_star;
        Row& hi = e.add(label("delay_upper", s), d, b.state_upper[i]);
        hi.theta_star = b.theta_star;
        hi.prefactor = b.h(static_cast<Eigen::Index>(i)) / b.h.minCoeff();
        lo.prefactor = b.h(static_cast<Eigen::Index>(i)) / b.h.maxCoeff();
      }
      return DelayRow{b.report.lower.value, b.report.upper.value};
    }
    if (std::holds_alternative<Antithetic>(process)) {
      e.add(label("delay_upper", tag), d, kNaN).notes = "no analytic delay bound for antithetic slots";
      return std::nullopt;
    }
    const auto b = delay_tail(process, arrival, d, horizon);
    e.bound(label("delay_lower", tag), d, b.lower);
    e.bound(label("delay_upper", tag), d, b.upper);
    return DelayRow{b.lower.value, b.upper.value};
  } catch (const UnstableError& err) {
    e.unstable(label("delay_upper", tag), d, std::string("unstable: ") + err.what());
    return std::nullopt;
  }
}

void delay_query(Emitter& e, bool force_mc) {
  const auto& process = e.scenario().process;
  const bool mc = force_mc || get_bool(e.params(), "mc", false, e.path());
  const auto ds = get_numbers(e.params(), "d_slots", kDefaultD, e.path());
  std::optional<double> horizon;
  if (e.params().contains("horizon_slots"))
    horizon = get_number(e.params(), "horizon_slots", 0.0, e.path());
  std::vector<std::optional<DelayRow>> analytic;
  for (double d : ds) analytic.push_back(delay_rows(e, process, d, horizon, ""));
  if (!mc) return;
  const auto& cfg = e.scenario().sim;
  if (const auto* m = std::get_if<MarkovAdditive>(&process); m && !m->initial_state) {
    const auto split = sim::empirical_delay_tail_by_state(*m, e.scenario().arrival.lambda, ds, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      Row& r = e.estimate("mc_delay_tail", ds[i], split.overall[i]);
      if (analytic[i]) e.check(r, analytic[i]->lower, analytic[i]->upper, split.overall[i]);
    }
    const auto b0 = delay_tail_markov(*m, e.scenario().arrival, 0.0);  // theta* only
    for (std::size_t s = 0; s < m->kernel.size(); ++s) {
      if (split.state_runs[s] == 0) continue;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto b = delay_tail_markov(*m, e.scenario().arrival, ds[i]);
        Row& r = e.estimate(label("mc_delay_tail", state_label(m->kernel, s)), ds[i], split.by_state[s][i]);
        r.theta_star = b0.theta_star;
        e.check(r, b.state_lower[s], b.state_upper[s], split.by_state[s][i]);
      }
    }
    return;
  }
  sim::SimConfig run = cfg;
  if (horizon) run.horizon = run.warmup + static_cast<std::uint64_t>(*horizon);
  const auto est = sim::empirical_delay_tail(process, e.scenario().arrival.lambda, ds, run);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Row& r = e.estimate("mc_delay_tail", ds[i], est[i]);
    if (analytic[i]) e.check(r, analytic[i]->lower, analytic[i]->upper, est[i]);
  }
}

void dcc_query(Emitter& e) {
  const double eps = get_number(e.params(), "epsilon", 1e-3, e.path());
  for (double d : get_numbers(e.params(), "d_slots", {10}, e.path())) {
    try {
      const auto c = delay_constrained_capacity(e.scenario().process, d, eps);
      const std::string note = "epsilon " + format_number(eps) + (c.notes.empty() ? "" : "; " + c.notes);
      e.add("dcc_conservative", d, c.lambda_conservative).notes = note;
      e.add("dcc_optimistic", d, c.lambda_optimistic).notes = note;
      e.add("one_shot_lower", d, c.one_shot_lower).notes = note;
      e.add("one_shot_upper", d, c.one_shot_upper).notes = note;
    } catch (const ValidationError& err) {
      e.add("dcc_conservative", d, kNaN).notes = err.what();
    }
  }
}

void order_query(Emitter& e, bool as_check) {
  const auto marginal = marginal_of(e.scenario().process);
  if (!marginal) {
    e.add("cx_chain", std::nullopt, kNaN).notes = "ordering needs a shared marginal (not a Markov kernel)";
    return;
  }
  const CapacityProcess neg = Antithetic{*marginal}, ind = Additive{*marginal}, pos = Comonotonic{*marginal};
  const auto& cfg = e.scenario().sim;
  const std::uint64_t t = slots(get_number(e.params(), "t_slots", 20, e.path()), e.path() + ".t_slots");
  const SampleSet sn = sample_sums(neg, t, cfg, "antithetic");
  const SampleSet si = sample_sums(ind, t, cfg, "independent");
  const SampleSet sp = sample_sums(pos, t, cfg, "comonotonic");
  auto verdict = [&](const char* name, const SampleSet& x, const SampleSet& y) {
    const OrderVerdict v = cx_order(x, y);
    Row& r = e.add(name, static_cast<double>(t), v.max_violation);
    r.horizon = static_cast<double>(t);
    r.notes = "verdict " + to_string(v.holds) + "; tolerance " + format_number(v.tolerance_used) +
              (v.reason.empty() ? "" : "; " + v.reason);
    if (as_check) e.check_flag(r, v.holds != Verdict::no);
    else r.check = to_string(v.holds);
  };
  verdict("cx(antithetic,independent)", sn, si);
  verdict("cx(independent,comonotonic)", si, sp);

  const ArrivalSpec& arrival = e.scenario().arrival;
  for (const auto& [name, p] : {std::pair<const char*, const CapacityProcess*>{"antithetic", &neg},
                                {"independent", &ind},
                                {"comonotonic", &pos}}) {
    const auto th = adjustment_coefficient(*p, arrival);
    Row& r = e.add(label("adjustment_coefficient", name), std::nullopt, th.value_or(kNaN));
    if (!th) r.notes = "no positive root";
  }
  for (const auto& [name, a, b] : {std::tuple<const char*, const CapacityProcess*, const CapacityProcess*>{
                                       "adjustment_order(antithetic,independent)", &neg, &ind},
                                   {"adjustment_order(independent,comonotonic)", &ind, &pos}}) {
    const auto ao = adjustment_ordering(*a, *b, arrival, cfg);
    Row& r = e.add(name, std::nullopt, ao.consistent ? 1.0 : 0.0);
    r.notes = ao.notes;
    if (as_check) e.check_flag(r, ao.consistent);
  }

  const auto ds = get_numbers(e.params(), "d_slots", one_to(20), e.path());
  const auto rep = delay_ordering_check(neg, ind, pos, arrival, ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    e.estimate("mc_delay_tail[antithetic]", ds[i], rep.negative[i]);
    e.estimate("mc_delay_tail[independent]", ds[i], rep.independent[i]);
    e.estimate("mc_delay_tail[comonotonic]", ds[i], rep.positive[i]);
    const double s1 = 3.0 * std::hypot(rep.negative[i].std_error, rep.independent[i].std_error);
    const double s2 = 3.0 * std::hypot(rep.independent[i].std_error, rep.positive[i].std_error);
    const bool holds = rep.negative[i].point <= rep.independent[i].point + s1 &&
                       rep.independent[i].point <= rep.positive[i].point + s2;
    Row& r = e.add("delay_chain", ds[i], holds ? 1.0 : 0.0);
    r.notes = "P(D > d) antithetic <= independent <= comonotonic within 3 standard errors";
    if (as_check) e.check_flag(r, holds);
  }
  auto dcc_row = [&](const char* name, const std::optional<double>& v) {
    Row& r = e.add(name, 10.0, v.value_or(kNaN));
    r.notes = v ? "epsilon 0.01" : "no analytic delay bound";
  };
  dcc_row("dcc[antithetic]", rep.dcc_negative);
  dcc_row("dcc[independent]", rep.dcc_independent);
  dcc_row("dcc[comonotonic]", rep.dcc_positive);
  Row& r = e.add("dcc_chain", 10.0, rep.dcc_chain_holds ? 1.0 : 0.0);
  if (as_check) e.check_flag(r, rep.dcc_chain_holds);
}

void interference_query(Emitter& e, bool force_mc) {
  const auto& process = e.scenario().process;
  const ArrivalSpec& arrival = e.scenario().arrival;
  const bool mc = force_mc || get_bool(e.params(), "mc", false, e.path());
  const auto ds = get_numbers(e.params(), "d_slots", kDefaultD, e.path());
  HopChain chain;
  chain.hops.assign(slots(get_number(e.params(), "hops", 2, e.path()), e.path() + ".hops"), process);
  chain.interference_k = slots(get_number(e.params(), "k", 1, e.path()), e.path() + ".k");
  chain.shared_channel = get_bool(e.params(), "shared_channel", false, e.path());
  const auto* additive = std::get_if<Additive>(&process);
  const auto* markov = std::get_if<MarkovAdditive>(&process);

  std::vector<double> feedback(ds.size(), kNaN);
  if (additive || markov) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      try {
        const FeedbackBound fb = additive ? feedback_delay_additive(*additive, arrival, ds[i])
                                          : feedback_delay_markov(*markov, arrival, ds[i]);
        e.bound("feedback_upper", ds[i], fb.report);
        e.bound("feedback_improved", ds[i], fb.improved);
        feedback[i] = fb.report.value;
      } catch (const UnstableError& err) {
        e.unstable("feedback_upper", ds[i], err.what());
      }
    }
  } else {
    e.add("feedback_upper", std::nullopt, kNaN).notes = "feedback bound needs additive or Markov slots";
  }

  const MultihopService svc = multihop_service_bound(chain, arrival);
  if (chain.shared_channel) {
    // the collapse assumes the leftover service is subadditive; check it on sampled traces
    const std::uint64_t h = 48;
    bool subadditive = true;
    for (std::uint64_t run = 0; run < 8 && subadditive; ++run) {
      const auto trace = sim::sample_capacity_trace(process, h, e.scenario().sim.seed, run);
      std::vector<double> served{0.0}, offered{0.0};
      for (std::uint64_t t = 0; t < h; ++t) {
        served.push_back(served.back() + trace.capacity[t]);
        offered.push_back(offered.back() + svc.multiplier * arrival.lambda);
      }
      subadditive = is_subadditive(single_hop_leftover(BivariateTrace::from_cumulative(served), offered));
    }
    Row& r = e.add("leftover_subadditive", std::nullopt, subadditive ? 1.0 : 0.0);
    r.notes = "8 sampled traces of 48 slots";
    e.check_flag(r, subadditive);
  }
  std::vector<double> multihop(ds.size(), kNaN);
  const bool e2e_ok = !chain.shared_channel && additive != nullptr;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    try {
      if (chain.shared_channel) {
        if (!additive && !markov) {
          e.add("multihop_upper", ds[i], kNaN).notes = "shared channel needs additive or Markov slots";
          continue;
        }
        const DelayBounds b = multihop_delay_bound(chain, arrival, ds[i]);
        Row& r = e.bound("multihop_upper", ds[i], b.upper);
        r.notes += (r.notes.empty() ? "" : "; ") + svc.notes;
        multihop[i] = b.upper.value;
      } else if (e2e_ok) {
        const E2EBound b = e2e_delay_bound_optimized(chain, arrival, ds[i]);
        Row& r = e.bound("e2e_upper", ds[i], b.report);
        r.notes += "; " + svc.notes;
        if (b.diverged) e.unstable("e2e_diverged", ds[i], b.report.notes);
        multihop[i] = b.report.value;
      } else {
        e.add("e2e_upper", ds[i], kNaN).notes = "end-to-end bound needs additive hops";
      }
    } catch (const UnstableError& err) {
      e.unstable("multihop_upper", ds[i], std::string("unstable: ") + err.what());
    }
  }

  if (!mc) return;
  const auto& cfg = e.scenario().sim;
  if (additive || markov) {
    const auto fq = sim::feedback_queue(process, arrival.lambda, ds, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      Row& r = e.estimate("mc_feedback", ds[i], fq[i]);
      if (!std::isnan(feedback[i])) e.check(r, 0.0, feedback[i], fq[i]);
    }
  }
  if (!chain.shared_channel) {
    const auto tq = sim::tandem_queue(chain, arrival.lambda, ds, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      Row& r = e.estimate("mc_tandem", ds[i], tq[i]);
      if (!std::isnan(multihop[i])) e.check(r, 0.0, multihop[i], tq[i]);
    }
  }
}

void simulate_query(Emitter& e) {
  const auto& process = e.scenario().process;
  const auto& cfg = e.scenario().sim;
  const auto ds = get_numbers(e.params(), "d_slots", kDefaultD, e.path());
  const auto est = sim::empirical_delay_tail(process, e.scenario().arrival.lambda, ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) e.estimate("mc_delay_tail", ds[i], est[i]);
  for (double tv : get_numbers(e.params(), "t_slots", {}, e.path())) {
    const std::uint64_t t = slots(tv, e.path() + ".t_slots");
    const auto samples = sim::sample_cumulative(process, t, cfg);
    std::vector<double> xs = get_numbers(e.params(), "x_bits_per_slot", {}, e.path());
    if (xs.empty())
      for (double f : {0.5, 0.8, 1.0, 1.2}) xs.push_back(f * mean_rate(process) * static_cast<double>(t));
    for (double x : xs) e.estimate("mc_cdf", x, sim::empirical_cdf(samples, x)).horizon = static_cast<double>(t);
  }
}

// comonotonic closed form against its own simulation, with the scenario marginal
void comonotonic_check(Emitter& e, const CapacityLaw& marginal) {
  const Comonotonic co{marginal};
  const auto& cfg = e.scenario().sim;
  const double window = static_cast<double>(cfg.horizon - cfg.warmup);
  const auto ds = get_numbers(e.params(), "d_slots", kDefaultD, e.path());
  const auto est = sim::empirical_delay_tail(co, e.scenario().arrival.lambda, ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const BoundReport exact = delay_tail_comonotonic(co, e.scenario().arrival, ds[i], window);
    e.bound("comonotonic_delay_exact", ds[i], exact);
    Row& r = e.estimate("mc_delay_tail[comonotonic]", ds[i], est[i]);
    r.horizon = window;
    e.check(r, exact.value, exact.value, est[i]);
  }
}

const json kEmpty = json::object();

std::vector<QueryRef> queries_of(const Scenario& s, const std::string& kind) {
  std::vector<QueryRef> out;
  for (std::size_t i = 0; i < s.queries.size(); ++i)
    if (s.queries[i].kind == kind)
      out.push_back({std::to_string(i), s.queries[i].params, "queries[" + std::to_string(i) + "]"});
  if (out.empty()) out.push_back({"default", kEmpty, "default " + kind});
  return out;
}

void validate_matrix(Context& ctx) {
  const Scenario& s = ctx.scenario;
  for (const auto& q : queries_of(s, "tail")) {
    Emitter e(ctx, q, "tail");
    bounds_query(e, true);
  }
  for (const auto& q : queries_of(s, "delay")) {
    Emitter e(ctx, q, "delay");
    delay_query(e, true);
    if (const auto m = marginal_of(s.process)) comonotonic_check(e, *m);
  }
  if (std::holds_alternative<Additive>(s.process) || std::holds_alternative<MarkovAdditive>(s.process)) {
    for (const auto& q : queries_of(s, "interference")) {
      Emitter e(ctx, q, "interference");
      interference_query(e, true);
    }
  }
  if (marginal_of(s.process)) {
    for (const auto& q : queries_of(s, "order")) {
      Emitter e(ctx, q, "order");
      order_query(e, true);
    }
  }
  Row summary;
  summary.query = "all";
  summary.kind = "validate";
  summary.quantity = "checks_passed";
  summary.argument = static_cast<double>(ctx.checks);
  summary.value = static_cast<double>(ctx.checks - ctx.failed_checks);
  summary.check = ctx.failed_checks == 0 ? "pass" : "fail";
  summary.notes = "argument holds the number of checks";
  ctx.rows.push_back(summary);
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& subcommands() {
  static const std::vector<std::pair<std::string, std::string>> list{
      {"capacity", "cdf"}, {"bounds", "tail"},         {"delay", "delay"},       {"dcc", "dcc"},
      {"order", "order"},  {"interference", "interference"}, {"simulate", "simulate"}, {"validate", ""}};
  return list;
}

void run_subcommand(const std::string& name, Context& ctx) {
  if (name == "validate") {
    validate_matrix(ctx);
    return;
  }
  const auto it = std::find_if(subcommands().begin(), subcommands().end(),
                               [&](const auto& p) { return p.first == name; });
  if (it == subcommands().end()) throw ValidationError("unknown subcommand '" + name + "'");
  for (const auto& q : queries_of(ctx.scenario, it->second)) {
    Emitter e(ctx, q, it->second);
    if (name == "capacity") capacity_query(e);
    else if (name == "bounds") bounds_query(e, false);
    else if (name == "delay") delay_query(e, false);
    else if (name == "dcc") dcc_query(e);
    else if (name == "order") order_query(e, false);
    else if (name == "interference") interference_query(e, false);
    else simulate_query(e);
  }
}

}  // namespace wnc::cli
