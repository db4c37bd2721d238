#include "wnc/capacity_law.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "wnc/error.hpp"

namespace wnc {

struct CapacityLaw::State {
  std::optional<ChannelSpec> spec;
  std::optional<FadingModel> model;
  std::optional<DiscreteDistribution> discrete;
  mutable std::once_flag grid_once;
  mutable std::optional<DiscreteDistribution> grid;
  double mean = 0.0;
  double variance = 0.0;
};

CapacityLaw::CapacityLaw(ChannelSpec spec, FadingModel model) {
  validate(spec);
  validate(model);
  auto st = std::make_shared<State>();
  st->spec = spec;
  st->model = std::move(model);
  st->mean = capacity_mean(*st->spec, *st->model);
  st->variance = capacity_variance(*st->spec, *st->model);
  state_ = std::move(st);
}

CapacityLaw::CapacityLaw(DiscreteDistribution law) {
  if (law.min() < 0.0) throw ValidationError("capacity law: support must be nonnegative");
  auto st = std::make_shared<State>();
  st->mean = law.mean();
  st->variance = law.variance();
  st->discrete = std::move(law);
  state_ = std::move(st);
}

CapacityLaw CapacityLaw::point_mass(double c) {
  return CapacityLaw(DiscreteDistribution::point_mass(c));
}

CapacityLaw CapacityLaw::two_point(double lo, double hi, double p_hi) {
  if (!(hi > lo)) throw ValidationError("two_point: need lo < hi");
  if (!(p_hi > 0.0 && p_hi < 1.0)) throw ValidationError("two_point: p_hi must lie in (0, 1)");
  return CapacityLaw(DiscreteDistribution({lo, hi}, {1.0 - p_hi, p_hi}));
}

bool CapacityLaw::is_discrete() const { return state_->discrete.has_value(); }

const DiscreteDistribution& CapacityLaw::discretized() const {
  if (state_->discrete) return *state_->discrete;
  std::call_once(state_->grid_once,
                 [this] { state_->grid = discretize_capacity(*state_->spec, *state_->model); });
  return *state_->grid;
}

double CapacityLaw::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("capacity law: x is NaN");
  if (state_->discrete) return state_->discrete->cdf(x);
  return x < 0.0 ? 0.0 : capacity_cdf(*state_->spec, *state_->model, x);
}

double CapacityLaw::cdf_left(double x) const {
  if (std::isnan(x)) throw DomainError("capacity law: x is NaN");
  if (state_->discrete) return state_->discrete->cdf_left(x);
  return x <= 0.0 ? 0.0 : capacity_cdf(*state_->spec, *state_->model, x);
}

double CapacityLaw::tail(double x) const {
  if (std::isnan(x)) throw DomainError("capacity law: x is NaN");
  if (state_->discrete) return state_->discrete->tail(x);
  return x < 0.0 ? 1.0 : capacity_tail(*state_->spec, *state_->model, x);
}

double CapacityLaw::quantile(double p) const {
  if (state_->discrete) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
    return state_->discrete->quantile(p);
  }
  return capacity_quantile_fast(*state_->spec, *state_->model, p);
}

double CapacityLaw::cgf(double theta) const {
  if (!std::isfinite(theta)) throw DomainError("cgf: theta must be finite");
  if (state_->discrete) return state_->discrete->log_mgf(theta);
  return wnc::cgf(*state_->spec, *state_->model, theta);
}

double CapacityLaw::mean() const { return state_->mean; }
double CapacityLaw::variance() const { return state_->variance; }

double CapacityLaw::min_value() const {
  if (state_->discrete) return state_->discrete->min();
  return 0.0;
}

double CapacityLaw::max_value() const {
  if (state_->discrete) return state_->discrete->max();
  if (const auto* fs = std::get_if<FrequencySelective>(&*state_->model);
      fs && fs->subchannels.size() > 1)
    return fs->sum_law->max();
  return std::numeric_limits<double>::infinity();
}

double CapacityLaw::sample(double u1, double u2, double u3) const {
  if (state_->discrete) return state_->discrete->quantile(u1);
  return capacity_sample(*state_->spec, *state_->model, u1, u2, u3);
}

std::string CapacityLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (state_->discrete) {
    os << "discrete(" << state_->discrete->size() << " atoms)";
  } else {
    os << model_name(*state_->model) << "(W=" << state_->spec->bandwidth_hz
       << ",snr=" << state_->spec->snr << ")";
  }
  return os.str();
}

}  // namespace wnc
