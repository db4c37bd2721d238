#include "wnc/processes.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "wnc/error.hpp"
#include "wnc/rng.hpp"

namespace wnc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd pattern(const Eigen::MatrixXd& m) {
  return (m.array() > 0.0).cast<double>().matrix();
}

// boolean matrix power by repeated squaring
Eigen::MatrixXd bool_power(Eigen::MatrixXd base, std::size_t e) {
  const auto n = base.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
  while (e > 0) {
    if (e & 1u) acc = pattern(acc * base);
    base = pattern(base * base);
    e >>= 1u;
  }
  return acc;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Law of C(U) + C(1 - U) for a discrete marginal.
DiscreteDistribution antithetic_pair_law(const DiscreteDistribution& law) {
  std::vector<double> cuts{0.0, 1.0};
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < law.size(); ++k) {
    acc += law.mass()[k];
    cuts.push_back(acc);
    cuts.push_back(1.0 - acc);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> values;
  std::vector<double> mass;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double w = cuts[k + 1] - cuts[k];
    if (w <= 0.0) continue;
    const double u = 0.5 * (cuts[k] + cuts[k + 1]);
    values.push_back(law.quantile(u) + law.quantile(1.0 - u));
    mass.push_back(w);
  }
  return DiscreteDistribution::from_atoms(std::move(values), std::move(mass));
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& m) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (n == 1) return true;
  const Eigen::MatrixXd reach =
      bool_power(pattern(m + Eigen::MatrixXd::Identity(m.rows(), m.cols())), n - 1);
  return (reach.array() > 0.0).all();
}

bool is_primitive(const Eigen::MatrixXd& m) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (n == 1) return m(0, 0) > 0.0;
  return (bool_power(pattern(m), (n - 1) * (n - 1) + 1).array() > 0.0).all();
}

MarkovKernel::MarkovKernel(Eigen::MatrixXd transition, std::vector<CapacityLaw> laws,
                           Attachment attachment, std::vector<std::string> states)
    : p_(std::move(transition)),
      laws_(std::move(laws)),
      attachment_(attachment),
      states_(std::move(states)) {
  const auto n = static_cast<std::size_t>(p_.rows());
  if (n == 0 || p_.cols() != p_.rows())
    throw ValidationError("invalid transition: matrix must be square and nonempty");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = p_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!std::isfinite(pij) || pij < 0.0)
        throw ValidationError("invalid transition: negative or non-finite entry");
      row += pij;
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw ValidationError("invalid transition: row " + std::to_string(i) + " sums to " +
                            fmt(row));
  }
  if (!is_irreducible(p_)) throw ValidationError("invalid transition: chain is reducible");
  if (!is_primitive(p_)) throw ValidationError("invalid transition: chain is periodic");
  const std::size_t want = attachment_ == Attachment::transition ? n * n : n;
  if (laws_.size() != want)
    throw ValidationError("invalid increments: expected " + std::to_string(want) + " laws, got " +
                          std::to_string(laws_.size()));
  if (states_.empty())
    for (std::size_t i = 0; i < n; ++i) states_.push_back("s" + std::to_string(i));
  if (states_.size() != n) throw ValidationError("invalid states: label count differs from P");

  // stationary law: pi (P - I) = 0 with one equation replaced by sum pi = 1
  Eigen::MatrixXd a = p_.transpose() - Eigen::MatrixXd::Identity(p_.rows(), p_.cols());
  a.row(a.rows() - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
  rhs(rhs.size() - 1) = 1.0;
  pi_ = a.fullPivLu().solve(rhs);
  pi_ = pi_.cwiseMax(0.0);
  pi_ /= pi_.sum();
}

const CapacityLaw& MarkovKernel::law(std::size_t i, std::size_t j) const {
  switch (attachment_) {
    case Attachment::destination:
      return laws_.at(j);
    case Attachment::source:
      return laws_.at(i);
    case Attachment::transition:
      break;
  }
  return laws_.at(i * size() + j);
}

std::size_t MarkovKernel::index_of(const std::string& label) const {
  auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) throw ValidationError("unknown state label '" + label + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

double MarkovKernel::mean_increment() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) {
      const double pij = p_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (pij > 0.0) m += pi_(static_cast<Eigen::Index>(i)) * pij * law(i, j).mean();
    }
  return m;
}

bool MarkovKernel::increments_independent_of_destination() const {
  if (size() == 1 || attachment_ == Attachment::source) return true;
  return false;
}

std::string structure_name(const CapacityProcess& process) {
  switch (process.index()) {
    case 0:
      return "comonotonic";
    case 1:
      return "additive";
    case 2:
      return "markov_additive";
    default:
      return "antithetic";
  }
}

double mean_rate(const CapacityProcess& process) {
  if (const auto* m = std::get_if<MarkovAdditive>(&process)) return m->kernel.mean_increment();
  if (const auto* c = std::get_if<Comonotonic>(&process)) return c->marginal.mean();
  if (const auto* a = std::get_if<Additive>(&process)) return a->marginal.mean();
  return std::get<Antithetic>(process).marginal.mean();
}

double process_cgf(const CapacityProcess& process, double theta) {
  if (theta == 0.0) return 0.0;
  if (const auto* a = std::get_if<Additive>(&process)) return a->marginal.cgf(theta);
  if (const auto* m = std::get_if<MarkovAdditive>(&process)) {
    try {
      return markov_spectral(m->kernel, theta).log_eigenvalue;
    } catch (const NumericError&) {
      return kInf;
    }
  }
  if (const auto* c = std::get_if<Comonotonic>(&process)) {
    // (1/t) log E[e^{theta t C}] tends to theta times the extreme of the support
    const double edge = theta > 0.0 ? c->marginal.max_value() : c->marginal.min_value();
    return std::isfinite(edge) ? theta * edge : kInf;
  }
  const auto& marginal = std::get<Antithetic>(process).marginal;
  return 0.5 * antithetic_pair_law(marginal.discretized()).log_mgf(theta);
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::cdf_lower:
      return "cdf_lower";
    case BoundKind::cdf_upper:
      return "cdf_upper";
    case BoundKind::tail_upper:
      return "tail_upper";
    case BoundKind::delay_upper:
      return "delay_upper";
    case BoundKind::delay_lower:
      return "delay_lower";
  }
  return "unknown";
}

double comonotonic_cdf(const Comonotonic& process, std::uint64_t t, double x) {
  if (t == 0) throw DomainError("comonotonic_cdf: t must be at least 1");
  if (!(x >= 0.0)) throw DomainError("comonotonic_cdf: x must be nonnegative");
  return process.marginal.cdf(x / static_cast<double>(t));
}

FrechetBounds frechet_bounds(const std::vector<CapacityLaw>& marginals, double x,
                             std::size_t grid) {
  if (marginals.empty()) throw DomainError("frechet_bounds: empty marginal list");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("frechet_bounds: x must be >= 0");
  if (grid < 1) throw DomainError("frechet_bounds: grid must be positive");
  const std::size_t n = grid + 1;
  const double h = x / static_cast<double>(grid);
  auto values = [&](const CapacityLaw& law) {
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k)
      f[k] = law.cdf(k == grid ? x : h * static_cast<double>(k));
    return f;
  };
  // lo[k] = max, hi[k] = min of sum_i F_i(u_i) over grid allocations with sum u_i = k h
  std::vector<double> lo = values(marginals[0]);
  std::vector<double> hi = lo;
  for (std::size_t m = 1; m < marginals.size(); ++m) {
    const std::vector<double> f = values(marginals[m]);
    std::vector<double> nlo(n, -kInf);
    std::vector<double> nhi(n, kInf);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j <= k; ++j) {
        nlo[k] = std::max(nlo[k], lo[j] + f[k - j]);
        nhi[k] = std::min(nhi[k], hi[j] + f[k - j]);
      }
    lo.swap(nlo);
    hi.swap(nhi);
  }
  const double t = static_cast<double>(marginals.size());
  return {std::max(0.0, lo[grid] - (t - 1.0)), std::min(1.0, hi[grid])};
}

std::pair<BoundReport, BoundReport> additive_cdf_bounds(const Additive& process, std::uint64_t t,
                                                        double x, const ThetaGrid& grid) {
  if (t == 0) throw DomainError("additive_cdf_bounds: t must be at least 1");
  if (!(x >= 0.0)) throw DomainError("additive_cdf_bounds: x must be nonnegative");
  const auto& law = process.marginal;
  const double tt = static_cast<double>(t);

  auto log_upper = [&](double th) { return tt * law.cgf(-th) + th * x; };
  auto log_tail = [&](double th) { return tt * law.cgf(th) - th * x; };

  BoundReport upper;
  upper.kind = BoundKind::cdf_upper;
  upper.horizon = tt;
  const double up_max = finite_theta_max(log_upper, grid);
  const auto uo = minimize_over_theta(log_upper, grid, up_max);
  if (!std::isfinite(uo.value)) throw NoExponentialMoment("additive_cdf_bounds");
  upper.value = std::min(1.0, std::exp(uo.value));
  upper.theta_star = uo.theta;

  BoundReport lower;
  lower.kind = BoundKind::cdf_lower;
  lower.horizon = tt;
  const double lo_max = finite_theta_max(log_tail, grid);
  const auto lo = minimize_over_theta(log_tail, grid, lo_max);
  if (!std::isfinite(lo.value)) throw NoExponentialMoment("additive_cdf_bounds");
  lower.value = std::max(0.0, 1.0 - std::exp(lo.value));
  lower.theta_star = lo.theta;
  return {lower, upper};
}

Eigen::MatrixXd mgf_matrix(const MarkovKernel& kernel, double theta) {
  if (!std::isfinite(theta)) throw DomainError("mgf_matrix: theta must be finite");
  const auto n = static_cast<Eigen::Index>(kernel.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double pij = kernel.transition()(i, j);
      if (pij == 0.0) {
        m(i, j) = 0.0;
        continue;
      }
      const double k = kernel.law(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).cgf(theta);
      const double v = pij * std::exp(k);
      if (!std::isfinite(v))
        throw NumericError("mgf_matrix", "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                             ") overflows at theta = " + fmt(theta));
      m(i, j) = v;
    }
  return m;
}

SpectralData perron_frobenius(const Eigen::MatrixXd& m, const Eigen::VectorXd* pi) {
  const Eigen::Index n = m.rows();
  if (n == 0 || m.cols() != n) throw ValidationError("perron_frobenius: matrix must be square");
  if (!m.allFinite() || (m.array() < 0.0).any())
    throw ValidationError("perron_frobenius: matrix must be finite and nonnegative");
  if (!is_irreducible(m)) throw ValidationError("perron_frobenius: matrix is reducible");
  SpectralData out;
  if (n == 1) {
    if (!(m(0, 0) > 0.0)) throw ValidationError("perron_frobenius: zero 1x1 matrix");
    out.log_eigenvalue = std::log(m(0, 0));
    out.right = Eigen::VectorXd::Ones(1);
    out.left = Eigen::VectorXd::Ones(1);
    return out;
  }
  // shifting by a positive multiple of I makes an irreducible matrix primitive
  const double shift = is_primitive(m) ? 0.0 : m.rowwise().sum().maxCoeff();
  const Eigen::MatrixXd a = m + shift * Eigen::MatrixXd::Identity(n, n);

  auto iterate = [&](const Eigen::MatrixXd& op, std::size_t& iters) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (iters = 1; iters <= 10'000; ++iters) {
      Eigen::VectorXd y = op * x;
      y /= y.maxCoeff();
      const double change = (y - x).cwiseAbs().maxCoeff();
      x = y;
      if (change <= 1e-13) return x;
    }
    throw NumericError("perron_frobenius",
                       "power iteration did not converge in 10000 iterations");
  };
  std::size_t it_right = 0;
  std::size_t it_left = 0;
  Eigen::VectorXd h = iterate(a, it_right);
  Eigen::VectorXd v = iterate(a.transpose(), it_left);
  out.iterations = std::max(it_right, it_left);
  if ((h.array() <= 0.0).any() || (v.array() <= 0.0).any())
    throw NumericError("perron_frobenius", "eigenvector is not strictly positive");

  const double rho = v.dot(m * h) / v.dot(h);
  out.log_eigenvalue = std::log(rho);
  if (pi != nullptr)
    h /= pi->dot(h);
  else
    h *= static_cast<double>(n) / h.sum();
  v /= v.dot(h);
  out.right = h;
  out.left = v;
  const Eigen::VectorXd r = m * h - rho * h;
  out.residual = (r.array() / (rho * h.array())).abs().maxCoeff();
  if (!(out.residual < 1e-9))
    throw NumericError("perron_frobenius", "eigen residual " + fmt(out.residual) + " after " +
                                               std::to_string(out.iterations) + " iterations");
  return out;
}

SpectralData markov_spectral(const MarkovKernel& kernel, double theta) {
  SpectralData out;
  if (kernel.size() == 1) {
    out.log_eigenvalue = kernel.law(0, 0).cgf(theta);
    if (!std::isfinite(out.log_eigenvalue)) throw NoExponentialMoment("markov_spectral");
    out.right = Eigen::VectorXd::Ones(1);
    out.left = Eigen::VectorXd::Ones(1);
  } else {
    const Eigen::MatrixXd m = mgf_matrix(kernel, theta);
    // an underflowed entry breaks the irreducible pattern of P; the tilt is out of range
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (kernel.transition()(i, j) > 0.0 && !(m(i, j) >= std::numeric_limits<double>::min()))
          throw NumericError("markov_spectral", "tilted kernel entry underflows");
    out = perron_frobenius(m, &kernel.stationary());
  }
  out.theta = theta;
  return out;
}

double markov_prefactor(const SpectralData& spec, const Eigen::VectorXd& pi,
                        std::optional<std::size_t> initial_state) {
  const double hmin = spec.right.minCoeff();
  if (initial_state) {
    if (*initial_state >= static_cast<std::size_t>(spec.right.size()))
      throw ValidationError("initial state out of range");
    return spec.right(static_cast<Eigen::Index>(*initial_state)) / hmin;
  }
  return pi.dot(spec.right) / hmin;
}

std::pair<BoundReport, BoundReport> markov_cdf_bounds(const MarkovAdditive& process,
                                                      std::uint64_t t, double x,
                                                      const ThetaGrid& grid,
                                                      std::optional<std::size_t> initial_state) {
  if (t == 0) throw DomainError("markov_cdf_bounds: t must be at least 1");
  if (!(x >= 0.0)) throw DomainError("markov_cdf_bounds: x must be nonnegative");
  const auto& kernel = process.kernel;
  const auto start = initial_state ? initial_state : process.initial_state;
  const double tt = static_cast<double>(t);

  // log of prefactor(theta) * exp(t kappa(theta) - theta x), signed theta
  auto log_bound = [&](double th) {
    try {
      const SpectralData s = markov_spectral(kernel, th);
      return std::log(markov_prefactor(s, kernel.stationary(), start)) + tt * s.log_eigenvalue -
             th * x;
    } catch (const NumericError&) {
      return kInf;
    }
  };
  auto log_upper = [&](double th) { return log_bound(-th); };
  auto log_tail = [&](double th) { return log_bound(th); };

  std::ostringstream notes;
  notes.precision(3);
  notes << "matrix-power self-check residual "
        << matrix_power_self_check(kernel, (t * 0x9E3779B97F4A7C15ull) ^ std::hash<double>{}(x));

  BoundReport upper;
  upper.kind = BoundKind::cdf_upper;
  upper.horizon = tt;
  const auto uo = minimize_over_theta(log_upper, grid, finite_theta_max(log_upper, grid));
  if (!std::isfinite(uo.value)) throw NoExponentialMoment("markov_cdf_bounds");
  upper.value = std::min(1.0, std::exp(uo.value));
  upper.theta_star = uo.theta;
  upper.prefactor =
      markov_prefactor(markov_spectral(kernel, -uo.theta), kernel.stationary(), start);
  upper.notes = notes.str();

  BoundReport lower;
  lower.kind = BoundKind::cdf_lower;
  lower.horizon = tt;
  const auto lo = minimize_over_theta(log_tail, grid, finite_theta_max(log_tail, grid));
  if (!std::isfinite(lo.value)) throw NoExponentialMoment("markov_cdf_bounds");
  lower.value = std::max(0.0, 1.0 - std::exp(lo.value));
  lower.theta_star = lo.theta;
  lower.prefactor = markov_prefactor(markov_spectral(kernel, lo.theta), kernel.stationary(), start);
  lower.notes = notes.str();
  return {lower, upper};
}

double matrix_power_self_check(const MarkovKernel& kernel, std::uint64_t seed, int pairs) {
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const std::uint64_t key = rng::stream_key(seed, static_cast<std::uint64_t>(k));
    const int t = 1 + static_cast<int>(rng::uniform(key, 0) * 10.0);
    const double theta = -2.0 + 4.0 * rng::uniform(key, 1);
    Eigen::MatrixXd m;
    try {
      m = mgf_matrix(kernel, theta);
    } catch (const NumericError&) {
      continue;
    }
    Eigen::MatrixXd direct = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    for (int s = 0; s < t; ++s) direct = direct * m;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXcd d = es.eigenvalues().array().pow(static_cast<double>(t));
    const Eigen::MatrixXcd via =
        es.eigenvectors() * d.asDiagonal() * es.eigenvectors().inverse();
    const double scale = direct.cwiseAbs().maxCoeff();
    worst = std::max(worst, (via.real() - direct).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

TransientBounds transient_bounds(const CapacityProcess& process, std::uint64_t t, double y_l,
                                 double y_u, const ThetaGrid& grid) {
  if (t == 0) throw DomainError("transient_bounds: t must be at least 1");
  if (!(y_l > 0.0) || !(y_u > 0.0)) throw DomainError("transient_bounds: y_l, y_u must be > 0");
  const double tt = static_cast<double>(t);

  std::function<double(double)> kappa;
  std::function<double(double)> prefactor = [](double) { return 1.0; };
  if (const auto* a = std::get_if<Additive>(&process)) {
    kappa = [a](double th) { return a->marginal.cgf(th); };
  } else if (const auto* m = std::get_if<MarkovAdditive>(&process)) {
    kappa = [m](double th) {
      try {
        return markov_spectral(m->kernel, th).log_eigenvalue;
      } catch (const NumericError&) {
        return kInf;
      }
    };
    prefactor = [m](double th) {
      return markov_prefactor(markov_spectral(m->kernel, th), m->kernel.stationary(),
                              m->initial_state);
    };
  } else {
    throw ValidationError("transient_bounds: needs an additive or Markov additive process");
  }

  // upper: maximize (t k(-th) + y_u) / (-th t) over th > 0
  auto neg_c_upper = [&](double th) { return (tt * kappa(-th) + y_u) / (th * tt); };
  // lower: minimize (t k(th) + y_l) / (th t) over th > 0
  auto c_lower = [&](double th) { return (tt * kappa(th) + y_l) / (th * tt); };

  const auto up = minimize_over_theta(neg_c_upper, grid, finite_theta_max(neg_c_upper, grid));
  const auto lo = minimize_over_theta(c_lower, grid, finite_theta_max(c_lower, grid));
  if (!std::isfinite(up.value) || !std::isfinite(lo.value))
    throw NumericError("transient_bounds", "no feasible theta");

  TransientBounds out;
  out.c_upper = -up.value;
  out.theta_upper = -up.theta;
  out.prefactor_upper = prefactor(-up.theta);
  out.prob_upper = std::min(1.0, out.prefactor_upper * std::exp(-y_u));
  out.c_lower = lo.value;
  out.theta_lower = lo.theta;
  out.prefactor_lower = prefactor(lo.theta);
  out.prob_lower = std::max(0.0, 1.0 - out.prefactor_lower * std::exp(-y_l));
  return out;
}

}  // namespace wnc
