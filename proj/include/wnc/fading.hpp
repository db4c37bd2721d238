#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "wnc/discrete_distribution.hpp"

namespace wnc {

/// Bandwidth W (Hz) and average SNR gamma. With unit slot duration the
/// instantaneous capacity W log2(1 + gamma H^2) is measured in bits per slot.
struct ChannelSpec {
  double bandwidth_hz = 1.0;
  double snr = 1.0;
};

/// Rayleigh envelope with E[H^2] = 2 sigma^2. sigma = 1/sqrt(2) gives unit mean power.
struct Rayleigh {
  double sigma = 0.70710678118654752;
};

/// Rice envelope |s + sigma0 (Z1 + i Z2)|: line-of-sight amplitude s, per-dimension
/// Gaussian standard deviation sigma0.
struct Rice {
  double s = 1.0;
  double sigma0 = 0.5;
};

/// Nakagami-m envelope: H^2 ~ Gamma(shape m, scale omega / m).
struct Nakagami {
  double m = 1.0;
  double omega = 1.0;
};

/// Weibull envelope with tail P(H > r) = exp(-c r^k).
struct Weibull {
  double c = 1.0;
  double k = 2.0;
};

/// Lognormal envelope: log H ~ Normal(mu, sigma^2).
struct Lognormal {
  double mu = 0.0;
  double sigma = 0.25;
};

struct Subchannel;

/// L independent parallel subchannels; capacity is the sum of subchannel capacities.
/// Construct with make(): the law of the sum is discretized once, eagerly.
struct FrequencySelective {
  std::vector<Subchannel> subchannels;
  std::shared_ptr<const DiscreteDistribution> sum_law;

  static FrequencySelective make(std::vector<Subchannel> subchannels, std::size_t grid = 4096);
};

using FadingModel = std::variant<Rayleigh, Rice, Nakagami, Weibull, Lognormal, FrequencySelective>;

struct Subchannel {
  ChannelSpec spec;
  FadingModel model;
};

/// Throws ValidationError naming the offending field.
void validate(const ChannelSpec& spec);
void validate(const FadingModel& model);

std::string model_name(const FadingModel& model);

// Envelope (channel gain) laws.
double gain_cdf(const FadingModel& model, double r);
double gain_tail(const FadingModel& model, double r);
double gain_quantile(const FadingModel& model, double p);

/// Gain threshold r(x) = sqrt((2^{x/W} - 1) / gamma) at which capacity equals x.
double gain_threshold(const ChannelSpec& spec, double x);

/// F_C(x). Rayleigh uses the closed form; the other envelopes go through the
/// gain law at r(x); frequency-selective channels use the discretized sum law
/// (a single subchannel delegates to that subchannel exactly).
double capacity_cdf(const ChannelSpec& spec, const FadingModel& model, double x);

/// 1 - F_C(x), computed from the gain tail directly.
double capacity_tail(const ChannelSpec& spec, const FadingModel& model, double x);

/// inf{x : F_C(x) >= p} by bisection to floating-point resolution.
double capacity_quantile(const ChannelSpec& spec, const FadingModel& model, double p);

/// Capacity quantile through the closed-form gain quantile where one exists
/// (Rayleigh, Weibull, lognormal, Nakagami); falls back to capacity_quantile.
double capacity_quantile_fast(const ChannelSpec& spec, const FadingModel& model, double p);

/// kappa(theta) = log E[exp(theta C)]; +infinity when the transform overflows e^700.
double cgf(const ChannelSpec& spec, const FadingModel& model, double theta);

/// E[C] and Var[C] by quadrature over the gain tail.
double capacity_mean(const ChannelSpec& spec, const FadingModel& model);
double capacity_variance(const ChannelSpec& spec, const FadingModel& model);

/// Draw one capacity value from three independent uniforms in (0, 1).
double capacity_sample(const ChannelSpec& spec, const FadingModel& model, double u1, double u2,
                       double u3);

/// Discretized capacity law (4096 atoms over the [1e-9, 1 - 1e-9] quantile range).
DiscreteDistribution discretize_capacity(const ChannelSpec& spec, const FadingModel& model,
                                         std::size_t points = 4096);

/// Exponential tail bound  P(C > x) <= a exp(-b x)  certified on a grid.
struct TailCertificate {
  double prefactor_a = 1.0;
  double rate_b = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double max_violation = 0.0;
};

enum class CertificateStatus { ok, heavy_tail, numeric_failure };

struct LightTailResult {
  CertificateStatus status = CertificateStatus::ok;
  TailCertificate certificate;
  std::string message;
};

/// Prefactor a(b) = max over the grid of tail(x) e^{b x}.
double certificate_prefactor(const std::function<double(double)>& tail, double rate_b,
                             double x_lo, double x_hi, std::size_t grid_n);

/// Largest rate b (bisection) whose prefactor a(b) stays below `prefactor_cap`.
/// A best rate below 1e-8 is reported as a heavy tail; NaN tail values as a
/// numeric failure.
LightTailResult certify_light_tail(const std::function<double(double)>& tail, double x_lo,
                                   double x_hi, std::size_t grid_n,
                                   double prefactor_cap = 2.718281828459045);

LightTailResult certify_light_tail(const ChannelSpec& spec, const FadingModel& model, double x_lo,
                                   double x_hi, std::size_t grid_n,
                                   double prefactor_cap = 2.718281828459045);

/// min(1, (f1 (x) f2 (x) ... fn)(x)) with the value-domain min-plus convolution
/// inf_{0<=y<=x} f(y) + g(x - y), evaluated left to right. Allocations are
/// restricted to a fixed grid of spacing `step`, so the value is an upper bound
/// on the exact infimum and nonincreasing in x.
double tail_minplus_convolution(const std::vector<std::function<double(double)>>& tails, double x,
                                double step = 1.0 / 64);

double tail_minplus_convolution(const std::vector<DiscreteDistribution>& laws, double x,
                                double step = 1.0 / 64);

}  // namespace wnc
