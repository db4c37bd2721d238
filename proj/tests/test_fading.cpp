#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "wnc/error.hpp"
#include "wnc/fading.hpp"
#include "wnc/special.hpp"

using namespace wnc;

namespace {

const ChannelSpec kUnit{1.0, 1.0};

std::vector<FadingModel> named_models() {
  return {Rayleigh{}, Rice{1.0, 0.5}, Nakagami{2.0, 1.0}, Weibull{1.0, 2.0}, Lognormal{0.0, 0.25}};
}

// Kolmogorov-Smirnov statistic of sorted samples against a CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("rayleigh capacity cdf closed form") {
  const FadingModel ray = Rayleigh{};
  CHECK(capacity_cdf(kUnit, ray, 0.0) == 0.0);
  CHECK(capacity_cdf(kUnit, ray, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(capacity_tail(kUnit, ray, 0.0) == 1.0);
  CHECK(capacity_tail(kUnit, ray, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(capacity_cdf(kUnit, ray, -0.1), DomainError);
}

TEST_CASE("rayleigh cdf at x=1 agrees with sampled gains") {
  // independent oracle: |h|^2 of a unit-power complex Gaussian, C = log2(1 + |h|^2)
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  const int n = 2'000'000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double a = g(rng), b = g(rng);
    if (std::log2(1.0 + a * a + b * b) <= 1.0) ++hits;
  }
  const double p = static_cast<double>(hits) / n;
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(p - capacity_cdf(kUnit, Rayleigh{}, 1.0)) < 3.0 * se);
}

TEST_CASE("rayleigh closed form matches generic gain path") {
  for (double sigma : {0.70710678118654752, 0.3, 1.7}) {
    const Rayleigh ray{sigma};
    for (double snr : {0.5, 1.0, 10.0}) {
      const ChannelSpec spec{2.0, snr};
      double worst = 0.0;
      for (int i = 0; i < 200; ++i) {
        const double x = 0.05 * i;
        const double generic = gain_cdf(ray, gain_threshold(spec, x));
        worst = std::max(worst, std::abs(generic - capacity_cdf(spec, ray, x)));
      }
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("cdf monotone, tail complements, quantile round trip") {
  std::vector<FadingModel> models = named_models();
  models.push_back(Nakagami{0.5, 1.0});
  models.push_back(Weibull{1.0, 0.5});
  models.push_back(Lognormal{0.0, 1.0});
  for (const auto& m : models) {
    CAPTURE(model_name(m));
    double prev = 0.0;
    double prev_tail = 1.0;
    for (int i = 0; i <= 300; ++i) {
      const double x = 0.02 * i;
      const double f = capacity_cdf(kUnit, m, x);
      const double t = capacity_tail(kUnit, m, x);
      CHECK(f >= prev - 1e-15);
      CHECK(t <= prev_tail + 1e-15);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(std::abs(f + t - 1.0) < 1e-9);
      prev = f;
      prev_tail = t;
    }
    CHECK(capacity_tail(kUnit, m, 200.0) < 1e-12);
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
      const double q = capacity_quantile(kUnit, m, p);
      CHECK(std::abs(capacity_cdf(kUnit, m, q) - p) < 1e-8);
      const double qf = capacity_quantile_fast(kUnit, m, p);
      CHECK(std::abs(capacity_cdf(kUnit, m, qf) - p) < 1e-8);
    }
  }
  CHECK(capacity_quantile(kUnit, Rayleigh{}, 1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(capacity_quantile(kUnit, Rayleigh{}, 1e-12) < 1e-9);
  CHECK_THROWS_AS(capacity_quantile(kUnit, Rayleigh{}, 0.0), DomainError);
  CHECK_THROWS_AS(capacity_quantile(kUnit, Rayleigh{}, 1.0), DomainError);
}

TEST_CASE("marcum q against closed cases") {
  // a = 0 reduces to the Rayleigh tail
  for (double b : {0.1, 1.0, 3.0})
    CHECK(marcum_q1(0.0, b) == doctest::Approx(std::exp(-b * b / 2)).epsilon(1e-13));
  // Q1(a, b) + Q1(b, a) = 1 + exp(-(a^2+b^2)/2) I0(ab)
  for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{3.0, 2.5}, std::pair{0.5, 4.0}}) {
    const double lhs = marcum_q1(a, b) + marcum_q1(b, a);
    const double rhs = 1.0 + std::exp(-(a * a + b * b) / 2) * std::cyl_bessel_i(0.0, a * b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(marcum_q1(a, b) + marcum_q1_complement(a, b) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("validation errors name the field") {
  CHECK_THROWS_AS(validate(ChannelSpec{0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(validate(ChannelSpec{1.0, NAN}), ValidationError);
  CHECK_THROWS_AS(validate(FadingModel{Nakagami{0.4, 1.0}}), ValidationError);
  CHECK_THROWS_AS(validate(FadingModel{Rice{-1.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(validate(FadingModel{Weibull{1.0, 0.0}}), ValidationError);
  CHECK_THROWS_AS(FrequencySelective::make({}), ValidationError);
  try {
    validate(ChannelSpec{1.0, -2.0});
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("snr") != std::string::npos);
  }
}

TEST_CASE("cgf against a fixed-grid trapezoid oracle") {
  // E[exp(theta C)] = int exp(theta log2(1 + r^2)) f_H(r) dr, Rayleigh density with sigma^2 = 1/2
  const double theta = 0.5;
  const int nodes = 1'000'000;
  const double r_max = 12.0;
  const double h = r_max / (nodes - 1);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double r = h * i;
    const double f = 2.0 * r * std::exp(-r * r) * std::pow(1.0 + r * r, theta / std::log(2.0));
    acc += (i == 0 || i == nodes - 1) ? 0.5 * f : f;
  }
  const double oracle = std::log(acc * h);
  CHECK(std::abs(cgf(kUnit, Rayleigh{}, theta) - oracle) < 1e-6);
  CHECK(cgf(kUnit, Rayleigh{}, 0.0) == 0.0);
  CHECK_THROWS_AS(cgf(kUnit, Rayleigh{}, INFINITY), DomainError);
}

TEST_CASE("cgf of a degenerate law and convexity") {
  const auto pm = DiscreteDistribution::point_mass(1.5);
  CHECK(pm.log_mgf(0.7) == doctest::Approx(0.7 * 1.5).epsilon(1e-15));
  for (const auto& m : named_models()) {
    CAPTURE(model_name(m));
    const double step = 0.05;
    std::vector<double> k;
    for (int i = -40; i <= 40; ++i) k.push_back(cgf(kUnit, m, step * i));
    for (std::size_t i = 1; i + 1 < k.size(); ++i) CHECK(k[i - 1] - 2 * k[i] + k[i + 1] >= -1e-7);
    // kappa'(0) = E[C]
    const double slope = (cgf(kUnit, m, 1e-4) - cgf(kUnit, m, -1e-4)) / 2e-4;
    CHECK(slope == doctest::Approx(capacity_mean(kUnit, m)).epsilon(1e-5));
  }
}

TEST_CASE("rayleigh mean against exponential integral") {
  // E[log(1 + X)] = e^{1} E1(1) for X ~ Exp(1)
  const double e1 = -std::expint(-1.0);
  CHECK(capacity_mean(kUnit, Rayleigh{}) == doctest::Approx(std::exp(1.0) * e1 / std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("sampling matches the cdf (KS at 99.9%)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 100'000;
  const double crit = 1.949 / std::sqrt(static_cast<double>(n));
  for (const auto& m : named_models()) {
    CAPTURE(model_name(m));
    std::vector<double> xs(n);
    for (auto& x : xs) {
      double u1 = u(rng), u2 = u(rng), u3 = u(rng);
      while (u1 == 0.0) u1 = u(rng);
      x = capacity_sample(kUnit, m, u1, u2, u3);
    }
    CHECK(ks_statistic(xs, [&](double x) { return capacity_cdf(kUnit, m, x); }) < crit);
  }
}

TEST_CASE("frequency selective channels") {
  const FadingModel single = FrequencySelective::make({Subchannel{kUnit, Rayleigh{}}});
  for (double x : {0.0, 0.3, 1.0, 2.5})
    CHECK(capacity_cdf(kUnit, single, x) == capacity_cdf(kUnit, Rayleigh{}, x));
  CHECK(cgf(kUnit, single, 0.3) == cgf(kUnit, Rayleigh{}, 0.3));

  const FadingModel pair =
      FrequencySelective::make({Subchannel{kUnit, Rayleigh{}}, Subchannel{{0.5, 2.0}, Rice{}}});
  CHECK(capacity_mean(kUnit, pair) ==
        doctest::Approx(capacity_mean(kUnit, Rayleigh{}) + capacity_mean({0.5, 2.0}, Rice{})).epsilon(2e-3));
  // sum of independent samples against the convolved law
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-300, 1.0);
  std::vector<double> xs(50'000);
  for (auto& x : xs)
    x = capacity_sample(kUnit, Rayleigh{}, u(rng), u(rng), u(rng)) +
        capacity_sample({0.5, 2.0}, Rice{}, u(rng), u(rng), u(rng));
  CHECK(ks_statistic(xs, [&](double x) { return capacity_cdf(kUnit, pair, x); }) <
        1.949 / std::sqrt(50'000.0) + 2e-3);
}

TEST_CASE("light-tail certificates") {
  std::vector<FadingModel> models = {Rayleigh{},          Rice{1.0, 0.5},     Nakagami{0.5, 1.0},
                                     Nakagami{1.0, 1.0},  Nakagami{2.0, 1.0}, Nakagami{4.0, 1.0},
                                     Weibull{1.0, 0.5},   Weibull{1.0, 1.0},  Weibull{1.0, 2.0},
                                     Lognormal{0.0, 0.25}, Lognormal{0.0, 1.0}};
  for (const auto& m : models) {
    CAPTURE(model_name(m));
    const auto res = certify_light_tail(kUnit, m, 0.0, 20.0, 512);
    CHECK(res.status == CertificateStatus::ok);
    CHECK(res.certificate.rate_b > 0.0);
    CHECK(res.certificate.max_violation <= 0.0);
  }
  // Rayleigh: at least as tight as e^{1/gamma} e^{-theta x} at theta = e ln2 / (W gamma)
  const auto ray = certify_light_tail(kUnit, Rayleigh{}, 0.0, 20.0, 512);
  const double theta = std::exp(1.0) * std::log(2.0);
  CHECK(ray.certificate.prefactor_a <= std::exp(1.0));
  CHECK(ray.certificate.rate_b >= theta);
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.2 * i;
    CHECK(capacity_tail(kUnit, Rayleigh{}, x) <= std::exp(1.0) * std::exp(-theta * x) * (1 + 1e-12));
  }

  const auto pm = DiscreteDistribution::point_mass(0.5);
  const auto cert = certify_light_tail([&](double x) { return pm.tail(x); }, 0.0, 10.0, 64);
  CHECK(cert.status == CertificateStatus::ok);
  CHECK(cert.certificate.rate_b >= 1.0);

  const auto heavy = certify_light_tail([](double x) { return 1.0 / (1.0 + x); }, 0.0, 1e12, 256);
  CHECK(heavy.status == CertificateStatus::heavy_tail);
  const auto bad = certify_light_tail([](double) { return NAN; }, 0.0, 1.0, 32);
  CHECK(bad.status == CertificateStatus::numeric_failure);
  CHECK_THROWS_AS(certify_light_tail([](double) { return 0.0; }, 1.0, 0.5, 32), DomainError);
}

TEST_CASE("tail min-plus convolution") {
  auto expo = [](double a, double b) {
    return std::function<double(double)>([a, b](double x) { return a * std::exp(-b * x); });
  };
  CHECK(tail_minplus_convolution({expo(0.5, 1.0)}, 2.0) == doctest::Approx(0.5 * std::exp(-2.0)));
  CHECK_THROWS_AS(tail_minplus_convolution(std::vector<std::function<double(double)>>{}, 1.0), DomainError);

  // product form when both allocations are interior
  const double a1 = 2.0, b1 = 1.0, a2 = 3.0, b2 = 2.0;
  const double w = 1 / b1 + 1 / b2;
  for (double x : {6.0, 10.0, 15.0}) {
    const double formula = std::pow(a1 * b1 * w, 1 / (b1 * w)) * std::pow(a2 * b2 * w, 1 / (b2 * w)) * std::exp(-x / w);
    const double got = tail_minplus_convolution({expo(a1, b1), expo(a2, b2)}, x);
    CHECK(got >= formula * (1 - 1e-12));
    CHECK(got <= formula * (1 + 1e-4));
  }
  // range and monotonicity, discrete-law tails
  const auto law = discretize_capacity(kUnit, Rayleigh{}, 512);
  std::vector<DiscreteDistribution> laws(3, law);
  double prev = 1.0;
  for (int i = 0; i <= 40; ++i) {
    const double v = tail_minplus_convolution(laws, 0.25 * i, 1.0 / 32);
    CHECK(v >= 0.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  // associativity up to grid tolerance: (f g) h vs f (g h) on an exact grid
  auto f = expo(1.0, 1.0), g = expo(2.0, 0.5), hh = expo(0.7, 3.0);
  const double left = tail_minplus_convolution({f, g, hh}, 8.0);
  const double right = tail_minplus_convolution({hh, g, f}, 8.0);
  CHECK(left == doctest::Approx(right).epsilon(1e-3));
}
