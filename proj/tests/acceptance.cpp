// Acceptance run: one PASS/FAIL line per criterion. Tolerances and budgets are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "wnc/delay.hpp"
#include "wnc/fading.hpp"
#include "wnc/interference.hpp"
#include "wnc/ordering.hpp"
#include "wnc/processes.hpp"
#include "wnc/rng.hpp"
#include "wnc/simulate.hpp"

using namespace wnc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates named sub-checks; the first failures are kept for the report.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 3) failures_ += (failures_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o;
    o.pass = failed_ == 0;
    std::ostringstream os;
    os << total_ - failed_ << "/" << total_ << " checks";
    if (!summary.empty()) os << ", " << summary;
    if (failed_) os << "; failed: " << failures_;
    o.detail = os.str();
    return o;
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::string failures_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Standard error for comparing an estimate with a bound: the larger of the
// empirical error and the binomial error at the bound, so a zero count is not
// read as contradicting a bound the runs cannot resolve.
double se_at(const sim::TailEstimate& e, double bound) {
  const double p = std::clamp(bound, 0.0, 1.0);
  return std::max(e.std_error, std::sqrt(p * (1.0 - p) / static_cast<double>(e.runs_used)));
}

bool within(const sim::TailEstimate& e, double lower, double upper) {
  return e.point >= lower - 3.0 * se_at(e, lower) && e.point <= upper + 3.0 * se_at(e, upper);
}

MarkovKernel gilbert_elliott() {
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.2, 0.8;
  return MarkovKernel(p, {CapacityLaw::point_mass(2.0), CapacityLaw::point_mass(0.0)});
}

const ChannelSpec kUnit{1.0, 1.0};

Outcome light_tail_certificates() {
  Checks c;
  const std::vector<FadingModel> models = {Rayleigh{},           Rice{1.0, 0.5},     Nakagami{0.5, 1.0},
                                           Nakagami{1.0, 1.0},   Nakagami{2.0, 1.0}, Nakagami{4.0, 1.0},
                                           Weibull{1.0, 0.5},    Weibull{1.0, 1.0},  Weibull{1.0, 2.0},
                                           Lognormal{0.0, 0.25}, Lognormal{0.0, 1.0}};
  for (const auto& m : models) {
    const auto r = certify_light_tail(kUnit, m, 0.0, 20.0, 512);
    c.expect(r.status == CertificateStatus::ok && r.certificate.rate_b > 0.0 &&
                 r.certificate.max_violation <= 0.0,
             model_name(m));
  }
  // F(x) <= e^{1/gamma} e^{-theta x} at theta = e ln 2 / (W gamma)
  double worst = 0.0;
  for (double w : {1.0, 2.0})
    for (double g : {0.5, 1.0, 2.0, 10.0}) {
      const ChannelSpec spec{w, g};
      const double theta = std::exp(1.0) * std::log(2.0) / (w * g);
      const auto tail = [&](double x) { return capacity_tail(spec, Rayleigh{}, x); };
      const double a = certificate_prefactor(tail, theta, 0.0, 40.0 * w, 4096);
      worst = std::max(worst, a / std::exp(1.0 / g));
      c.expect(a <= std::exp(1.0 / g), "rayleigh prefactor W=" + num(w) + " gamma=" + num(g));
    }
  return c.outcome("worst prefactor ratio to e^{1/gamma} " + num(worst));
}

Outcome rayleigh_closed_form() {
  Checks c;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = 0.025 * i;
    const double generic = gain_cdf(Rayleigh{}, gain_threshold(kUnit, x));
    worst = std::max(worst, std::abs(generic - capacity_cdf(kUnit, Rayleigh{}, x)));
  }
  c.expect(worst < 1e-9, "max discrepancy " + num(worst));
  return c.outcome("max discrepancy " + num(worst));
}

Outcome lundberg_exactness() {
  Checks c;
  // theta* = 2 ln u with u the real root of u^3 - u^2 - u - 1 (from u^4 - 2u^3 + 1 = 0, u = e^{theta/2})
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid - mid * mid - mid - 1.0 > 0.0 ? hi : lo) = mid;
  }
  const double oracle = 2.0 * std::log(0.5 * (lo + hi));
  const double theta = lundberg_root(Additive{CapacityLaw::two_point(0.0, 2.0)}, ArrivalSpec{0.5}).theta_star;
  c.expect(std::abs(theta - oracle) < 1e-8, "theta " + num(theta) + " vs " + num(oracle));
  return c.outcome("|theta - oracle| = " + num(std::abs(theta - oracle)));
}

Outcome additive_sandwich() {
  Checks c;
  const Additive two{CapacityLaw::two_point(0.0, 2.0)};
  const std::vector<double> ds{1, 2, 5, 10, 20};
  // horizons sized so that the walk's drift has carried it far below lambda d
  const std::vector<std::pair<double, std::uint64_t>> cases{{0.3, 400}, {0.5, 800}, {0.7, 2000}};
  double worst_z = 0.0;
  for (const auto& [lambda, horizon] : cases) {
    sim::SimConfig cfg;
    cfg.seed = 11;
    cfg.runs = 1'000'000;
    cfg.horizon = horizon;
    const auto est = sim::empirical_delay_tail(two, lambda, ds, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto b = delay_tail_additive(two, ArrivalSpec{lambda}, ds[i]);
      const double lo = b.lower.value, up = b.upper.value;
      worst_z = std::max({worst_z, (lo - est[i].point) / se_at(est[i], lo),
                          (est[i].point - up) / se_at(est[i], up)});
      c.expect(within(est[i], lo, up), "lambda " + num(lambda) + " d " + num(ds[i]) + ": " +
                                           num(est[i].point) + " not in [" + num(lo) + ", " + num(up) + "]");
    }
  }
  return c.outcome("largest excursion beyond a bound " + num(worst_z) + " SE");
}

Outcome markov_sandwich() {
  Checks c;
  const MarkovKernel ge = gilbert_elliott();
  const MarkovAdditive process{ge};
  const std::vector<double> ds{5, 10, 20};
  for (const auto& [lambda, horizon] : std::vector<std::pair<double, std::uint64_t>>{{0.5, 1500}, {1.0, 5000}}) {
    sim::SimConfig cfg;
    cfg.seed = 12;
    cfg.runs = 200'000;
    cfg.horizon = horizon;
    const auto split = sim::empirical_delay_tail_by_state(process, lambda, ds, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto b = delay_tail_markov(process, ArrivalSpec{lambda}, ds[i]);
      const std::string at = "lambda " + num(lambda) + " d " + num(ds[i]);
      c.expect(within(split.overall[i], b.stationary_lower, b.stationary_upper), at + " stationary");
      for (std::size_t s = 0; s < ge.size(); ++s)
        c.expect(within(split.by_state[s][i], b.state_lower[s], b.state_upper[s]),
                 at + " state " + std::to_string(s));
    }
  }
  // Perron-Frobenius root of [[p11 a, p12], [p21 a, p22]] with a = e^{2 theta}
  double pf_worst = 0.0;
  for (double theta : {-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0}) {
    const double a = std::exp(2.0 * theta);
    const double tr = 0.9 * a + 0.8;
    const double det = 0.9 * a * 0.8 - 0.1 * 0.2 * a;
    const double rho = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    pf_worst = std::max(pf_worst, std::abs(std::exp(markov_spectral(ge, theta).log_eigenvalue) - rho) / rho);
  }
  c.expect(pf_worst < 1e-10, "PF relative error " + num(pf_worst));
  // E_pi[e^{theta S(t)}] by path enumeration against pi M^t 1
  double power_worst = 0.0;
  const double cap[2] = {2.0, 0.0};
  for (double theta : {-1.0, -0.3, 0.4}) {
    const Eigen::MatrixXd m = mgf_matrix(ge, theta);
    Eigen::RowVectorXd row = ge.stationary().transpose();
    for (int t = 1; t <= 10; ++t) {
      row = row * m;
      double paths = 0.0;
      for (int code = 0; code < (1 << (t + 1)); ++code) {
        int prev = code & 1;
        double w = ge.stationary()(prev);
        for (int k = 1; k <= t; ++k) {
          const int next = (code >> k) & 1;
          w *= ge.transition()(prev, next) * std::exp(theta * cap[next]);
          prev = next;
        }
        paths += w;
      }
      power_worst = std::max(power_worst, std::abs(row.sum() - paths) / paths);
    }
  }
  c.expect(power_worst < 1e-8, "matrix power residual " + num(power_worst));
  return c.outcome("PF error " + num(pf_worst) + ", matrix power residual " + num(power_worst));
}

Outcome comonotonic_closed_forms() {
  Checks c;
  const CapacityLaw law(kUnit, Rayleigh{});
  const Comonotonic co{law};
  sim::SimConfig cfg;
  cfg.seed = 13;
  cfg.runs = 100'000;
  double worst_ks = 0.0;
  for (std::uint64_t t : {1u, 5u, 20u}) {
    cfg.horizon = t;
    const auto s = sim::sample_cumulative(co, t, cfg);
    const double tt = static_cast<double>(t);
    const double ks = sim::ks_statistic(s, [&](double x) { return capacity_cdf(kUnit, Rayleigh{}, x / tt); });
    worst_ks = std::max(worst_ks, ks / sim::ks_critical_999(s.size()));
    c.expect(ks < sim::ks_critical_999(s.size()), "KS t=" + std::to_string(t));
  }
  const double lambda = 0.4;
  const double fc = capacity_cdf(kUnit, Rayleigh{}, lambda);
  const std::vector<double> ds{1, 5, 20};
  for (double d : ds)
    c.expect(std::abs(delay_tail_comonotonic(co, ArrivalSpec{lambda}, d).value - fc) < 1e-12,
             "analytic d=" + num(d));
  cfg.horizon = 4000;
  const auto est = sim::empirical_delay_tail(co, lambda, ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i)
    c.expect(std::abs(est[i].point - fc) <= 3.0 * se_at(est[i], fc), "empirical d=" + num(ds[i]));
  return c.outcome("KS / critical at most " + num(worst_ks));
}

Outcome frechet_envelope() {
  Checks c;
  const CapacityLaw law(kUnit, Rayleigh{});
  const std::vector<std::pair<std::string, CapacityProcess>> copulas{
      {"comonotonic", Comonotonic{law}}, {"independent", Additive{law}}, {"antithetic", Antithetic{law}}};
  sim::SimConfig cfg;
  cfg.seed = 14;
  cfg.runs = 100'000;
  for (std::uint64_t t : {2u, 3u, 4u}) {
    const std::vector<CapacityLaw> marg(t, law);
    const double top = static_cast<double>(t) * law.quantile(0.999);
    std::vector<double> xs;
    for (int k = 1; k <= 24; ++k) xs.push_back(top * k / 24.0);
    std::vector<FrechetBounds> env;
    for (double x : xs) env.push_back(frechet_bounds(marg, x));
    for (const auto& [name, p] : copulas) {
      cfg.horizon = t;
      const auto s = sim::sample_cumulative(p, t, cfg);
      for (std::size_t i = 0; i < xs.size(); ++i)
        c.expect(within(sim::empirical_cdf(s, xs[i]), env[i].lower, env[i].upper),
                 name + " t=" + std::to_string(t) + " x=" + num(xs[i]));
    }
  }
  return c.outcome("");
}

Outcome ordering_chain() {
  Checks c;
  const CapacityLaw law(kUnit, Rayleigh{});
  const CapacityProcess neg = Antithetic{law}, ind = Additive{law}, pos = Comonotonic{law};
  sim::SimConfig cfg;
  cfg.seed = 15;
  cfg.runs = 100'000;
  const SampleSet sn = sample_sums(neg, 20, cfg), si = sample_sums(ind, 20, cfg), sp = sample_sums(pos, 20, cfg);
  c.expect(cx_order(sn, si).holds == Verdict::yes, "S_N <=cx S_ind");
  c.expect(cx_order(si, sp).holds == Verdict::yes, "S_ind <=cx S_P");

  // E[(U1 + U2 - 1)^+] = 1/6 with independent uniforms, 1/4 with U1 = U2
  std::vector<double> indep, comon;
  for (std::uint64_t k = 0; k < 1'000'000; ++k) {
    const std::uint64_t key = rng::stream_key(16, k);
    const double u1 = rng::uniform(key, 0), u2 = rng::uniform(key, 1);
    indep.push_back(u1 + u2);
    comon.push_back(2.0 * u1);
  }
  const double sl_i = SampleSet(indep).stop_loss(1.0), sl_c = SampleSet(comon).stop_loss(1.0);
  c.expect(std::abs(sl_i - 1.0 / 6.0) < 1e-3, "independent stop-loss " + num(sl_i));
  c.expect(std::abs(sl_c - 1.0 / 4.0) < 1e-3, "comonotonic stop-loss " + num(sl_c));

  int with_roots = 0;
  for (const auto& [marginal, lambda] : std::vector<std::pair<CapacityLaw, double>>{
           {law, 0.5},
           {CapacityLaw(DiscreteDistribution({0.0, 1.0, 3.0}, {0.3, 0.4, 0.3})), 1.1}}) {
    const CapacityProcess a = Antithetic{marginal}, b = Additive{marginal}, p = Comonotonic{marginal};
    for (const auto& [x, y] : {std::pair{&a, &b}, std::pair{&b, &p}}) {
      const auto ao = adjustment_ordering(*x, *y, ArrivalSpec{lambda}, cfg);
      if (ao.theta_a && ao.theta_b) ++with_roots;
      c.expect(ao.consistent, "adjustment ordering: " + ao.notes);
    }
  }
  c.expect(with_roots > 0, "no pair with both roots");

  std::vector<double> ds;
  for (int d = 1; d <= 20; ++d) ds.push_back(d);
  sim::SimConfig walk = cfg;
  walk.runs = 50'000;
  walk.horizon = 600;
  const auto rep = delay_ordering_check(neg, ind, pos, ArrivalSpec{0.5}, ds, walk, sim::TailEvent::reaches);
  c.expect(rep.chain_holds, "P(D >= d) chain");
  return c.outcome("stop-loss " + num(sl_i) + " and " + num(sl_c) + ", " + std::to_string(with_roots) +
                   " adjustment pairs with both roots");
}

Outcome feedback() {
  Checks c;
  std::vector<double> ds;
  for (int d = 1; d <= 20; ++d) ds.push_back(d);
  sim::SimConfig cfg;
  cfg.seed = 17;
  cfg.runs = 100'000;
  cfg.horizon = 600;
  const Additive two{CapacityLaw::two_point(0.0, 2.0)};
  const auto fa = sim::feedback_queue(two, 0.25, ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i)
    c.expect(within(fa[i], 0.0, feedback_delay_additive(two, ArrivalSpec{0.25}, ds[i]).report.value),
             "additive d=" + num(ds[i]));
  const MarkovAdditive ge{gilbert_elliott()};
  cfg.horizon = 2000;
  const auto fm = sim::feedback_queue(ge, 0.4, ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i)
    c.expect(within(fm[i], 0.0, feedback_delay_markov(ge, ArrivalSpec{0.4}, ds[i]).report.value),
             "markov d=" + num(ds[i]));

  for (double d : {0.0, 1.0, 5.0, 20.0}) {
    c.expect(feedback_delay_additive(two, ArrivalSpec{0.6}, d, 1.0).improved.value ==
                 delay_tail_additive(two, ArrivalSpec{0.6}, d).upper.value,
             "additive multiplier 1");
    c.expect(feedback_delay_markov(ge, ArrivalSpec{0.5}, d, std::nullopt, 1.0).report.value ==
                 delay_tail_markov(ge, ArrivalSpec{0.5}, d).stationary_upper,
             "markov multiplier 1");
  }
  for (std::size_t k : {1u, 2u}) {
    std::vector<double> values;
    for (std::size_t n = k; n <= 6; ++n) {
      HopChain chain;
      chain.hops.assign(n, two);
      chain.interference_k = k;
      chain.shared_channel = true;
      values.push_back(multihop_delay_bound(chain, ArrivalSpec{0.2}, 4.0).upper.value);
    }
    c.expect(std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }),
             "shared channel K=" + std::to_string(k));
  }
  return c.outcome("");
}

Outcome end_to_end() {
  Checks c;
  const double lambda = 0.25;
  HopChain chain;
  chain.hops.assign(2, Additive{CapacityLaw::two_point(0.0, 4.0)});
  const std::vector<double> ds{1, 5, 10, 20, 30, 40};
  sim::SimConfig cfg;
  cfg.seed = 18;
  cfg.runs = 100'000;
  cfg.horizon = 400;
  const auto mc = sim::tandem_queue(chain, lambda, ds, cfg);
  int informative = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double b = e2e_delay_bound_optimized(chain, ArrivalSpec{lambda}, ds[i]).report.value;
    informative += b < 1.0;
    c.expect(within(mc[i], 0.0, b), "tandem d=" + num(ds[i]));
  }
  c.expect(informative >= 2, "bound below 1 at fewer than two d");

  // one hop: e^{-theta lambda d} sum_t rho^t summed term by term
  HopChain one;
  one.hops = {Additive{CapacityLaw::two_point(0.0, 4.0)}};
  double worst = 0.0;
  for (double theta : {0.3, 0.8, 1.2})
    for (double d : {10.0, 20.0, 40.0}) {
      const double rho = (0.5 + 0.5 * std::exp(-4.0 * theta)) * std::exp(2.0 * theta * lambda);
      double sum = 0.0, term = 1.0;
      for (int t = 0; t < 100'000 && term > 0.0; ++t) {
        sum += term;
        term *= rho;
      }
      const double direct = std::min(1.0, std::exp(-theta * lambda * d) * sum);
      const double v = e2e_delay_bound(one, ArrivalSpec{lambda}, d, theta).report.value;
      worst = std::max(worst, std::abs(v - direct));
    }
  c.expect(worst < 1e-12, "N=1 discrepancy " + num(worst));
  return c.outcome(std::to_string(informative) + " informative d, N=1 discrepancy " + num(worst));
}

Outcome reproducibility() {
  Checks c;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wnc_acceptance";
  fs::create_directories(dir);
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string tables[2], metas[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir / ("validate_" + std::to_string(k) + ".csv");
    std::ostringstream so, se;
    const int code = cli::run({"validate", "--scenario", WNC_DEFAULT_SCENARIO, "--out", out.string(), "--seed", "7"},
                              so, se);
    c.expect(code == 0, "exit status " + std::to_string(code) + " " + se.str());
    tables[k] = read(out);
    metas[k] = read(out.string() + ".meta.json");
  }
  c.expect(!tables[0].empty() && tables[0] == tables[1], "tables differ");
  c.expect(!metas[0].empty() && metas[0] == metas[1], "metadata differs");
  c.expect(tables[0].find(",fail,") == std::string::npos, "validate reported a failed check");
  return c.outcome(std::to_string(tables[0].size()) + " bytes per table");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"light-tail certificates", 10, light_tail_certificates},
      {"rayleigh closed form vs transform path", 1, rayleigh_closed_form},
      {"lundberg root exactness", 1, lundberg_exactness},
      {"additive delay sandwich", 60, additive_sandwich},
      {"markov-additive sandwich", 60, markov_sandwich},
      {"comonotonic closed forms", 30, comonotonic_closed_forms},
      {"frechet envelope", 60, frechet_envelope},
      {"ordering chain", 60, ordering_chain},
      {"feedback and shared channel", 60, feedback},
      {"end-to-end tandem bound", 120, end_to_end},
      {"validate reproducibility", 600, reproducibility},
  };
  int failed = 0;
  const auto start_all = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < criteria[i].budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2zu %-40s %7.2f s (budget %g s)%s  %s\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                secs, criteria[i].budget_s, in_time ? "" : " OVER BUDGET", o.detail.c_str());
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_all).count();
  std::printf("total %.1f s\n", total);
  return failed == 0 ? 0 : 1;
}
