#include "wnc/fading.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "wnc/error.hpp"
#include "wnc/numeric.hpp"
#include "wnc/special.hpp"

namespace wnc {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kOverflowLog = 700.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& field) {
  if (!ok) throw ValidationError("invalid " + field);
}

double checked_rate(double x) {
  if (std::isnan(x)) throw DomainError("capacity: rate is NaN");
  if (x < 0.0) throw DomainError("capacity: rate must be nonnegative");
  return x;
}

// r^2 = (2^{x/W} - 1) / gamma, accurate for small x.
double gain_threshold_sq(const ChannelSpec& spec, double x) {
  return std::expm1(x * kLn2 / spec.bandwidth_hz) / spec.snr;
}

// capacity as a function of the envelope
double capacity_of_gain(const ChannelSpec& spec, double r) {
  return spec.bandwidth_hz * std::log1p(spec.snr * r * r) / kLn2;
}

double capacity_of_gain_derivative(const ChannelSpec& spec, double r) {
  return spec.bandwidth_hz / kLn2 * 2.0 * spec.snr * r / (1.0 + spec.snr * r * r);
}

const FrequencySelective* as_selective(const FadingModel& model) {
  return std::get_if<FrequencySelective>(&model);
}

// Gain quantile cut points used to split quadrature ranges into panels.
std::vector<double> gain_breakpoints(const FadingModel& model) {
  static const double probs[] = {0.0,  1e-6, 1e-3, 0.05,  0.25,   0.5,    0.75,  0.9,
                                 0.99, 1e-3, 1e-5, 1e-7, 1e-9, 1e-10, 1e-11, 1e-12};
  std::vector<double> pts;
  for (int i = 0; i < 9; ++i) pts.push_back(probs[i] == 0.0 ? 0.0 : gain_quantile(model, probs[i]));
  for (int i = 9; i < 16; ++i) pts.push_back(gain_quantile(model, 1.0 - probs[i]));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double integrate_panels(const std::function<double(double)>& f, const std::vector<double>& pts) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    auto res = numeric::adaptive_simpson(f, pts[k], pts[k + 1], 1e-13, 1e-12, 200'000);
    total += res.value;
  }
  return total;
}

}  // namespace

FrequencySelective FrequencySelective::make(std::vector<Subchannel> subchannels,
                                            std::size_t grid) {
  if (subchannels.empty()) throw ValidationError("invalid subchannels: need at least one");
  FrequencySelective out;
  std::shared_ptr<const DiscreteDistribution> acc;
  for (const auto& sub : subchannels) {
    validate(sub.spec);
    validate(sub.model);
    DiscreteDistribution law = discretize_capacity(sub.spec, sub.model, grid);
    acc = acc ? std::make_shared<const DiscreteDistribution>(acc->convolve_grid(law, grid))
              : std::make_shared<const DiscreteDistribution>(std::move(law));
  }
  out.subchannels = std::move(subchannels);
  out.sum_law = std::move(acc);
  return out;
}

void validate(const ChannelSpec& spec) {
  require(std::isfinite(spec.bandwidth_hz) && spec.bandwidth_hz > 0.0, "bandwidth_hz");
  require(std::isfinite(spec.snr) && spec.snr > 0.0, "snr");
}

void validate(const FadingModel& model) {
  std::visit(overloaded{
                 [](const Rayleigh& m) { require(std::isfinite(m.sigma) && m.sigma > 0, "rayleigh.sigma"); },
                 [](const Rice& m) {
                   require(std::isfinite(m.s) && m.s >= 0, "rice.s");
                   require(std::isfinite(m.sigma0) && m.sigma0 > 0, "rice.sigma0");
                 },
                 [](const Nakagami& m) {
                   require(std::isfinite(m.m) && m.m >= 0.5, "nakagami.m");
                   require(std::isfinite(m.omega) && m.omega > 0, "nakagami.omega");
                 },
                 [](const Weibull& m) {
                   require(std::isfinite(m.c) && m.c > 0, "weibull.c");
                   require(std::isfinite(m.k) && m.k > 0, "weibull.k");
                 },
                 [](const Lognormal& m) {
                   require(std::isfinite(m.mu), "lognormal.mu");
                   require(std::isfinite(m.sigma) && m.sigma > 0, "lognormal.sigma");
                 },
                 [](const FrequencySelective& m) {
                   require(!m.subchannels.empty() && m.sum_law != nullptr,
                           "frequency_selective.subchannels");
                 },
             },
             model);
}

std::string model_name(const FadingModel& model) {
  return std::visit(overloaded{
                        [](const Rayleigh&) { return std::string("rayleigh"); },
                        [](const Rice&) { return std::string("rice"); },
                        [](const Nakagami&) { return std::string("nakagami"); },
                        [](const Weibull&) { return std::string("weibull"); },
                        [](const Lognormal&) { return std::string("lognormal"); },
                        [](const FrequencySelective&) { return std::string("frequency_selective"); },
                    },
                    model);
}

double gain_cdf(const FadingModel& model, double r) {
  if (r <= 0.0) return 0.0;
  return std::visit(
      overloaded{
          [r](const Rayleigh& m) { return -std::expm1(-r * r / (2.0 * m.sigma * m.sigma)); },
          [r](const Rice& m) { return marcum_q1_complement(m.s / m.sigma0, r / m.sigma0); },
          [r](const Nakagami& m) { return boost::math::gamma_p(m.m, m.m * r * r / m.omega); },
          [r](const Weibull& m) { return -std::expm1(-m.c * std::pow(r, m.k)); },
          [r](const Lognormal& m) {
            return 0.5 * std::erfc(-(std::log(r) - m.mu) / (m.sigma * std::numbers::sqrt2));
          },
          [](const FrequencySelective&) -> double {
            throw ValidationError("gain law undefined for frequency-selective channels");
          },
      },
      model);
}

double gain_tail(const FadingModel& model, double r) {
  if (r <= 0.0) return 1.0;
  return std::visit(
      overloaded{
          [r](const Rayleigh& m) { return std::exp(-r * r / (2.0 * m.sigma * m.sigma)); },
          [r](const Rice& m) { return marcum_q1(m.s / m.sigma0, r / m.sigma0); },
          [r](const Nakagami& m) { return boost::math::gamma_q(m.m, m.m * r * r / m.omega); },
          [r](const Weibull& m) { return std::exp(-m.c * std::pow(r, m.k)); },
          [r](const Lognormal& m) {
            return 0.5 * std::erfc((std::log(r) - m.mu) / (m.sigma * std::numbers::sqrt2));
          },
          [](const FrequencySelective&) -> double {
            throw ValidationError("gain law undefined for frequency-selective channels");
          },
      },
      model);
}

double gain_quantile(const FadingModel& model, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gain_quantile: p must lie in (0, 1)");
  return std::visit(
      overloaded{
          [p](const Rayleigh& m) { return m.sigma * std::sqrt(-2.0 * std::log1p(-p)); },
          [p, &model](const Rice& m) {
            // bracket then bisect on the Marcum-Q based CDF
            double hi = m.s + m.sigma0;
            while (gain_cdf(model, hi) < p) hi *= 2.0;
            return numeric::bisect([&](double r) { return gain_cdf(model, r) - p; }, 0.0, hi,
                                   1e-14 * hi);
          },
          [p](const Nakagami& m) {
            return std::sqrt(boost::math::gamma_p_inv(m.m, p) * m.omega / m.m);
          },
          [p](const Weibull& m) { return std::pow(-std::log1p(-p) / m.c, 1.0 / m.k); },
          [p](const Lognormal& m) {
            const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
            return std::exp(m.mu + m.sigma * z);
          },
          [](const FrequencySelective&) -> double {
            throw ValidationError("gain law undefined for frequency-selective channels");
          },
      },
      model);
}

double gain_threshold(const ChannelSpec& spec, double x) {
  return std::sqrt(gain_threshold_sq(spec, checked_rate(x)));
}

double capacity_cdf(const ChannelSpec& spec, const FadingModel& model, double x) {
  checked_rate(x);
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return capacity_cdf(fs->subchannels[0].spec, fs->subchannels[0].model, x);
    return fs->sum_law->cdf(x);
  }
  if (const auto* ray = std::get_if<Rayleigh>(&model)) {
    return -std::expm1(-gain_threshold_sq(spec, x) / (2.0 * ray->sigma * ray->sigma));
  }
  return gain_cdf(model, std::sqrt(gain_threshold_sq(spec, x)));
}

double capacity_tail(const ChannelSpec& spec, const FadingModel& model, double x) {
  checked_rate(x);
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return capacity_tail(fs->subchannels[0].spec, fs->subchannels[0].model, x);
    return fs->sum_law->tail(x);
  }
  if (const auto* ray = std::get_if<Rayleigh>(&model)) {
    return std::exp(-gain_threshold_sq(spec, x) / (2.0 * ray->sigma * ray->sigma));
  }
  return gain_tail(model, std::sqrt(gain_threshold_sq(spec, x)));
}

double capacity_quantile(const ChannelSpec& spec, const FadingModel& model, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("capacity_quantile: p must lie in (0, 1)");
  double hi = 1.0;
  while (capacity_cdf(spec, model, hi) < p) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("capacity_quantile", "could not bracket quantile");
  }
  double lo = 0.0;
  if (capacity_cdf(spec, model, 0.0) >= p) return 0.0;
  // run to floating-point resolution: steep CDFs near zero need relative accuracy
  for (int it = 0; it < 2000 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (capacity_cdf(spec, model, mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double capacity_quantile_fast(const ChannelSpec& spec, const FadingModel& model, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("capacity_quantile: p must lie in (0, 1)");
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return capacity_quantile_fast(fs->subchannels[0].spec, fs->subchannels[0].model, p);
    return fs->sum_law->quantile(p);
  }
  if (std::holds_alternative<Rice>(model)) return capacity_quantile(spec, model, p);
  return capacity_of_gain(spec, gain_quantile(model, p));
}

double cgf(const ChannelSpec& spec, const FadingModel& model, double theta) {
  if (!std::isfinite(theta)) throw DomainError("cgf: theta must be finite");
  if (theta == 0.0) return 0.0;
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return cgf(fs->subchannels[0].spec, fs->subchannels[0].model, theta);
    return fs->sum_law->log_mgf(theta);
  }
  const std::vector<double> pts = gain_breakpoints(model);
  const double r_max = pts.back();
  const double expo = theta * spec.bandwidth_hz / kLn2;  // g(r) = (1 + gamma r^2)^expo
  auto log_g = [&](double r) { return expo * std::log1p(spec.snr * r * r); };

  if (theta > 0.0) {
    // E[g(H)] = 1 + int_0^rmax g'(r) P(H > r) dr
    auto log_term = [&](double r) {
      if (r <= 0.0) return -std::numeric_limits<double>::infinity();
      const double tail = gain_tail(model, r);
      if (tail <= 0.0) return -std::numeric_limits<double>::infinity();
      const double dlog = expo * 2.0 * spec.snr * r / (1.0 + spec.snr * r * r);
      return log_g(r) + std::log(dlog) + std::log(tail);
    };
    double shift = 0.0;
    for (double r : numeric::lin_space(0.0, r_max, 257)) shift = std::max(shift, log_term(r));
    for (double r : pts) shift = std::max(shift, log_term(r));
    if (shift > kOverflowLog) return std::numeric_limits<double>::infinity();
    const double integral =
        integrate_panels([&](double r) { return std::exp(log_term(r) - shift); }, pts);
    const double value = shift + std::log(std::exp(-shift) + integral);
    if (!std::isfinite(value) || value > kOverflowLog) return std::numeric_limits<double>::infinity();
    return value;
  }
  // theta < 0: E[g(H)] = int_0^inf (-g'(r)) P(H <= r) dr, remainder past rmax ~ g(rmax)
  auto term = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double dlog = -expo * 2.0 * spec.snr * r / (1.0 + spec.snr * r * r);
    return std::exp(log_g(r)) * dlog * gain_cdf(model, r);
  };
  const double integral = integrate_panels(term, pts);
  const double remainder = std::exp(log_g(r_max)) * gain_cdf(model, r_max);
  return std::log(integral + remainder);
}

double capacity_mean(const ChannelSpec& spec, const FadingModel& model) {
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return capacity_mean(fs->subchannels[0].spec, fs->subchannels[0].model);
    return fs->sum_law->mean();
  }
  const auto pts = gain_breakpoints(model);
  return integrate_panels(
      [&](double r) { return capacity_of_gain_derivative(spec, r) * gain_tail(model, r); }, pts);
}

double capacity_variance(const ChannelSpec& spec, const FadingModel& model) {
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return capacity_variance(fs->subchannels[0].spec, fs->subchannels[0].model);
    return fs->sum_law->variance();
  }
  const auto pts = gain_breakpoints(model);
  const double second = integrate_panels(
      [&](double r) {
        return 2.0 * capacity_of_gain(spec, r) * capacity_of_gain_derivative(spec, r) *
               gain_tail(model, r);
      },
      pts);
  const double mean = capacity_mean(spec, model);
  return std::max(0.0, second - mean * mean);
}

double capacity_sample(const ChannelSpec& spec, const FadingModel& model, double u1, double u2,
                       double u3) {
  (void)u3;
  if (const auto* rice = std::get_if<Rice>(&model)) {
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    const double re = rice->s + rice->sigma0 * radius * std::cos(angle);
    const double im = rice->sigma0 * radius * std::sin(angle);
    return capacity_of_gain(spec, std::hypot(re, im));
  }
  return capacity_quantile_fast(spec, model, u1);
}

DiscreteDistribution discretize_capacity(const ChannelSpec& spec, const FadingModel& model,
                                         std::size_t points) {
  if (const auto* fs = as_selective(model)) {
    if (fs->subchannels.size() == 1)
      return discretize_capacity(fs->subchannels[0].spec, fs->subchannels[0].model, points);
    return *fs->sum_law;
  }
  return DiscreteDistribution::discretize(
      [&](double x) { return x < 0.0 ? 0.0 : capacity_cdf(spec, model, x); },
      [&](double p) { return capacity_quantile_fast(spec, model, p); }, points);
}

double certificate_prefactor(const std::function<double(double)>& tail, double rate_b,
                             double x_lo, double x_hi, std::size_t grid_n) {
  double a = 0.0;
  for (double x : numeric::lin_space(x_lo, x_hi, grid_n)) {
    const double t = tail(x);
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (t > 0.0) a = std::max(a, t * std::exp(rate_b * x));
  }
  return a;
}

LightTailResult certify_light_tail(const std::function<double(double)>& tail, double x_lo,
                                   double x_hi, std::size_t grid_n, double prefactor_cap) {
  if (!(x_lo >= 0.0 && x_hi > x_lo)) throw DomainError("certify_light_tail: need 0 <= x_lo < x_hi");
  if (grid_n < 16) throw DomainError("certify_light_tail: grid_n must be at least 16");
  if (!(prefactor_cap >= 1.0)) throw DomainError("certify_light_tail: prefactor cap below 1");
  LightTailResult out;
  out.certificate.x_lo = x_lo;
  out.certificate.x_hi = x_hi;

  auto prefactor = [&](double b) { return certificate_prefactor(tail, b, x_lo, x_hi, grid_n); };
  const double a0 = prefactor(0.0);
  if (std::isnan(a0)) {
    out.status = CertificateStatus::numeric_failure;
    out.message = "tail evaluated to NaN";
    return out;
  }
  constexpr double kMinRate = 1e-8;
  constexpr double kMaxRate = 1e6;
  double b;
  if (a0 == 0.0 || prefactor(kMaxRate) <= prefactor_cap) {
    b = kMaxRate;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    while (prefactor(hi) <= prefactor_cap) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double a = prefactor(mid);
      if (std::isnan(a)) {
        out.status = CertificateStatus::numeric_failure;
        out.message = "tail evaluated to NaN";
        return out;
      }
      if (a <= prefactor_cap)
        lo = mid;
      else
        hi = mid;
    }
    b = lo;
  }
  if (b < kMinRate) {
    out.status = CertificateStatus::heavy_tail;
    out.message = "no exponential rate above 1e-8 fits under the prefactor cap";
    out.certificate.rate_b = b;
    return out;
  }
  double a = prefactor(b);
  if (a == 0.0) a = 1.0;
  double violation = -std::numeric_limits<double>::infinity();
  for (double x : numeric::lin_space(x_lo, x_hi, grid_n))
    violation = std::max(violation, tail(x) - a * std::exp(-b * x));
  if (violation > 0.0) {
    a *= 1.0 + 1e-12;
    violation = -std::numeric_limits<double>::infinity();
    for (double x : numeric::lin_space(x_lo, x_hi, grid_n))
      violation = std::max(violation, tail(x) - a * std::exp(-b * x));
  }
  out.certificate.prefactor_a = a;
  out.certificate.rate_b = b;
  out.certificate.max_violation = violation;
  return out;
}

LightTailResult certify_light_tail(const ChannelSpec& spec, const FadingModel& model, double x_lo,
                                   double x_hi, std::size_t grid_n, double prefactor_cap) {
  validate(spec);
  validate(model);
  return certify_light_tail([&](double x) { return capacity_tail(spec, model, x); }, x_lo, x_hi,
                            grid_n, prefactor_cap);
}

double tail_minplus_convolution(const std::vector<std::function<double(double)>>& tails, double x,
                                double step) {
  if (tails.empty()) throw DomainError("tail_minplus_convolution: empty tail list");
  if (!(x >= 0.0) || !std::isfinite(x))
    throw DomainError("tail_minplus_convolution: x must be finite and nonnegative");
  if (!(step > 0.0)) throw DomainError("tail_minplus_convolution: step must be positive");
  if (tails.size() == 1) return std::clamp(tails[0](x), 0.0, 1.0);
  // Partial sums of the first n-1 allocations live on the fixed grid k * step;
  // the last tail receives the remainder x - k * step. The grid does not move
  // with x, so the result is nonincreasing in x like the exact infimum.
  const auto n = static_cast<std::size_t>(std::floor(x / step)) + 1;
  if (n > (1u << 16)) throw DomainError("tail_minplus_convolution: grid too fine for x");
  std::vector<double> running(n);
  std::vector<double> fvals(n);
  for (std::size_t k = 0; k < n; ++k) running[k] = tails[0](step * static_cast<double>(k));
  for (std::size_t j = 1; j + 1 < tails.size(); ++j) {
    for (std::size_t k = 0; k < n; ++k) fvals[k] = tails[j](step * static_cast<double>(k));
    std::vector<double> next(n, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i <= k; ++i) next[k] = std::min(next[k], running[i] + fvals[k - i]);
    running.swap(next);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k)
    best = std::min(best, running[k] + tails.back()(std::max(0.0, x - step * static_cast<double>(k))));
  return std::clamp(best, 0.0, 1.0);
}

double tail_minplus_convolution(const std::vector<DiscreteDistribution>& laws, double x,
                                double step) {
  std::vector<std::function<double(double)>> tails;
  tails.reserve(laws.size());
  for (const auto& law : laws) tails.emplace_back([&law](double y) { return law.tail(y); });
  return tail_minplus_convolution(tails, x, step);
}

}  // namespace wnc
