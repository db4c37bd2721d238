#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "wnc/error.hpp"
#include "wnc/simulate.hpp"

using namespace wnc;

namespace {

MarkovKernel gilbert_elliott() {
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.2, 0.8;
  return MarkovKernel(p, {CapacityLaw::point_mass(2.0), CapacityLaw::point_mass(0.0)});
}

}  // namespace

TEST_CASE("lindley recursion trivial paths") {
  const auto full = sim::lindley_queue(0.7, std::vector<double>(50, 0.7));
  for (double b : full.backlog) CHECK(b == 0.0);
  const auto empty = sim::lindley_queue(1.0, std::vector<double>(10, 0.0));
  for (std::size_t t = 0; t <= 10; ++t) CHECK(empty.backlog[t] == static_cast<double>(t));
  const auto half = sim::lindley_queue(2.0, std::vector<double>(4, 0.0));
  CHECK(half.delay[4] == 4.0);
  CHECK_THROWS_AS(sim::lindley_queue(0.0, {1.0}), DomainError);
}

TEST_CASE("lindley recursion equals the max-plus representation") {
  // B(t) = max over s <= t of lambda (t - s) - S(s, t)
  const CapacityProcess p = Additive{CapacityLaw::two_point(0.0, 2.0)};
  const auto trace = sim::sample_capacity_trace(p, 2000, 5, 0).capacity;
  const auto path = sim::lindley_queue(0.5, trace);
  for (std::size_t t = 1; t <= trace.size(); t += 37) {
    double best = 0.0;
    double acc = 0.0;
    for (std::size_t s = t; s-- > 0;) {
      acc += 0.5 - trace[s];
      best = std::max(best, acc);
    }
    CHECK(path.backlog[t] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("mean backlog agrees with an independent implementation") {
  const double lambda = 0.5;
  const std::uint64_t horizon = 10'000;
  const int runs = 400;
  const CapacityProcess p = Additive{CapacityLaw::two_point(0.0, 2.0)};
  double m1 = 0.0, s1 = 0.0, m2 = 0.0, s2 = 0.0;
  std::mt19937_64 gen(2024);
  std::bernoulli_distribution coin(0.5);
  for (int r = 0; r < runs; ++r) {
    const auto tr = sim::sample_capacity_trace(p, horizon, 9, static_cast<std::uint64_t>(r));
    const double a = sim::lindley_queue(lambda, tr.capacity).backlog.back();
    double b = 0.0;
    for (std::uint64_t t = 0; t < horizon; ++t) {
      b += lambda - (coin(gen) ? 2.0 : 0.0);
      if (b < 0.0) b = 0.0;
    }
    m1 += a;
    s1 += a * a;
    m2 += b;
    s2 += b * b;
  }
  m1 /= runs;
  m2 /= runs;
  const double v1 = s1 / runs - m1 * m1;
  const double v2 = s2 / runs - m2 * m2;
  const double se = std::sqrt((v1 + v2) / runs);
  CHECK(std::abs(m1 - m2) < 3.0 * se);
}

TEST_CASE("replicas are reproducible and thread-count independent") {
  const CapacityProcess p = MarkovAdditive{gilbert_elliott(), std::nullopt};
  const auto a = sim::sample_capacity_trace(p, 100, 3, 17);
  const auto b = sim::sample_capacity_trace(p, 100, 3, 17);
  CHECK(a.capacity == b.capacity);
  CHECK(a.state == b.state);
  sim::SimConfig cfg;
  cfg.runs = 3000;
  cfg.horizon = 300;
  const auto one = sim::empirical_delay_tail(p, 1.0, {1.0, 4.0, 9.0}, cfg);
  cfg.threads = 4;
  const auto four = sim::empirical_delay_tail(p, 1.0, {1.0, 4.0, 9.0}, cfg);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].point == four[i].point);
}

TEST_CASE("sampled capacities follow the marginal law") {
  const CapacityLaw ray(ChannelSpec{1.0, 2.0}, Rayleigh{});
  sim::SimConfig cfg;
  cfg.runs = 50'000;
  const auto s = sim::sample_cumulative(Additive{ray}, 1, cfg);
  CHECK(sim::ks_statistic(s, [&](double x) { return ray.cdf(x); }) < sim::ks_critical_999(s.size()));
  // comonotonic S(t) = t C(1)
  const auto co = sim::sample_cumulative(Comonotonic{ray}, 7, cfg);
  CHECK(sim::ks_statistic(co, [&](double x) { return ray.cdf(x / 7.0); }) <
        sim::ks_critical_999(co.size()));
}

TEST_CASE("one-state markov samples match the additive law") {
  const CapacityLaw law(ChannelSpec{1.0, 1.0}, Nakagami{1.5, 1.0});
  const MarkovAdditive one{MarkovKernel(Eigen::MatrixXd::Ones(1, 1), {law}), std::nullopt};
  sim::SimConfig cfg;
  cfg.runs = 20'000;
  const auto a = sim::sample_cumulative(one, 5, cfg);
  cfg.seed = 99;
  const auto b = sim::sample_cumulative(Additive{law}, 5, cfg);
  CHECK(sim::ks_two_sample(a, b) < sim::ks_two_sample_critical_999(a.size(), b.size()));
}

TEST_CASE("markov traces reproduce the transition matrix") {
  const auto tr = sim::sample_capacity_trace(MarkovAdditive{gilbert_elliott(), 0}, 200'000, 1, 0);
  double n[2][2] = {{0, 0}, {0, 0}};
  std::size_t prev = 0;
  for (std::size_t t = 0; t < tr.state.size(); ++t) {
    n[prev][tr.state[t]] += 1.0;
    CHECK(tr.capacity[t] == (tr.state[t] == 0 ? 2.0 : 0.0));
    prev = tr.state[t];
  }
  const double p00 = n[0][0] / (n[0][0] + n[0][1]);
  const double p11 = n[1][1] / (n[1][0] + n[1][1]);
  CHECK(std::abs(p00 - 0.9) < 4.0 * std::sqrt(0.09 / (n[0][0] + n[0][1])));
  CHECK(std::abs(p11 - 0.8) < 4.0 * std::sqrt(0.16 / (n[1][0] + n[1][1])));
}

TEST_CASE("antithetic pairs are mirror quantiles") {
  const CapacityLaw ray(ChannelSpec{1.0, 1.0}, Rayleigh{});
  const auto tr = sim::sample_capacity_trace(Antithetic{ray}, 400, 2, 0).capacity;
  for (std::size_t t = 0; t + 1 < tr.size(); t += 2) {
    const double u = ray.cdf(tr[t]);
    CHECK(ray.cdf(tr[t + 1]) == doctest::Approx(1.0 - u).epsilon(1e-6));
  }
}

TEST_CASE("delay tail estimator edge cases") {
  const CapacityProcess p = Additive{CapacityLaw::two_point(0.0, 2.0)};
  sim::SimConfig cfg;
  cfg.runs = 1000;
  cfg.horizon = 200;
  CHECK(sim::empirical_delay_tail(p, 0.5, 0.0, cfg).point == 1.0);
  cfg.event = sim::TailEvent::exceeds;
  const auto e0 = sim::empirical_delay_tail(p, 0.5, 0.0, cfg);
  CHECK(e0.point > 0.0);
  CHECK(e0.point <= 1.0);
  // walk on the half-integer lattice: D >= 1 and D > 0 are the same event
  cfg.event = sim::TailEvent::reaches;
  CHECK(sim::empirical_delay_tail(p, 0.5, 1.0, cfg).point == e0.point);
  const CapacityProcess steady = Additive{CapacityLaw::point_mass(1.0)};
  CHECK(sim::empirical_delay_tail(steady, 0.9, 0.5, cfg).point == 0.0);
  cfg.horizon = 0;
  CHECK_THROWS_AS(sim::empirical_delay_tail(p, 0.5, 1.0, cfg), ValidationError);
}

TEST_CASE("per-state split sums to the overall estimate") {
  const MarkovAdditive p{gilbert_elliott(), std::nullopt};
  sim::SimConfig cfg;
  cfg.runs = 20'000;
  cfg.horizon = 500;
  const auto split = sim::empirical_delay_tail_by_state(p, 1.0, {2.0, 6.0}, cfg);
  const auto plain = sim::empirical_delay_tail(p, 1.0, {2.0, 6.0}, cfg);
  CHECK(split.state_runs[0] + split.state_runs[1] == cfg.runs);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(split.overall[i].point == plain[i].point);
    const double mix = (split.by_state[0][i].point * split.state_runs[0] +
                        split.by_state[1][i].point * split.state_runs[1]) /
                       cfg.runs;
    CHECK(mix == doctest::Approx(plain[i].point).epsilon(1e-12));
  }
  // starting in the bad state can only lengthen the delay
  CHECK(split.by_state[1][0].point > split.by_state[0][0].point);
}

TEST_CASE("feedback queue trivial regimes") {
  sim::SimConfig cfg;
  cfg.runs = 200;
  cfg.horizon = 400;
  const std::vector<double> grid{0.5, 2.0, 5.0};
  for (const auto& e : sim::feedback_queue(Additive{CapacityLaw::point_mass(2.0)}, 0.9, grid, cfg))
    CHECK(e.point == 0.0);
  for (const auto& e : sim::feedback_queue(Additive{CapacityLaw::two_point(0.0, 2.0)}, 0.0, grid, cfg))
    CHECK(e.point == 0.0);
  // 2 lambda above the mean capacity: first-pass backlog grows without bound
  for (const auto& e : sim::feedback_queue(Additive{CapacityLaw::two_point(0.0, 2.0)}, 0.6, grid, cfg))
    CHECK(e.point > 0.97);
  // without contention from its own output a stable queue is mostly empty
  const auto light = sim::feedback_queue(Additive{CapacityLaw::two_point(0.0, 2.0)}, 0.1, grid, cfg);
  CHECK(light[2].point < 0.2);
}

TEST_CASE("tandem queue trivial regimes") {
  sim::SimConfig cfg;
  cfg.runs = 100;
  cfg.horizon = 200;
  HopChain chain;
  chain.hops = {Additive{CapacityLaw::point_mass(3.1)}, Additive{CapacityLaw::point_mass(3.1)},
                Additive{CapacityLaw::point_mass(3.1)}};
  chain.interference_k = 2;
  for (const auto& e : sim::tandem_queue(chain, 1.0, {0.5, 1.0}, cfg)) CHECK(e.point == 0.0);
  chain.interference_k = 3;  // (2K - 1) lambda = 5 > 3.1
  for (const auto& e : sim::tandem_queue(chain, 1.0, {1.0, 10.0}, cfg)) CHECK(e.point == 1.0);
  HopChain empty;
  CHECK_THROWS_AS(sim::tandem_queue(empty, 1.0, {1.0}, cfg), ValidationError);
}

TEST_CASE("one-hop tandem equals the plain queue") {
  const CapacityProcess p = Additive{CapacityLaw::two_point(0.0, 2.0)};
  HopChain chain;
  chain.hops = {p};
  sim::SimConfig cfg;
  cfg.runs = 2000;
  cfg.horizon = 300;
  const auto t = sim::tandem_queue(chain, 0.5, {2.0, 6.0}, cfg);
  // B(H) of the Lindley recursion on the same replicas
  std::uint64_t hits[2] = {0, 0};
  for (std::uint64_t r = 0; r < cfg.runs; ++r) {
    const double b = sim::lindley_queue(0.5, sim::sample_capacity_trace(p, cfg.horizon, cfg.seed, r).capacity)
                         .backlog.back();
    hits[0] += b >= 1.0 - 1e-9;
    hits[1] += b >= 3.0 - 1e-9;
  }
  CHECK(t[0].point == static_cast<double>(hits[0]) / cfg.runs);
  CHECK(t[1].point == static_cast<double>(hits[1]) / cfg.runs);
}

TEST_CASE("trace dump layout") {
  std::ostringstream os;
  sim::SimConfig cfg;
  cfg.runs = 3;
  cfg.horizon = 4;
  sim::write_trace_dump(os, MarkovAdditive{gilbert_elliott(), 1}, 1.0, cfg, 2);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "run,slot,state,capacity,backlog");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 8);
}
