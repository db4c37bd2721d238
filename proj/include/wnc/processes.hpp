#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wnc/capacity_law.hpp"
#include "wnc/theta_search.hpp"

namespace wnc {

/// Which transition endpoint a per-slot capacity law is attached to.
/// destination: H_ij = H_j; source: H_ij = H_i; transition: one law per (i, j).
enum class Attachment { destination, source, transition };

/// Finite-state, discrete-time Markov additive kernel: transition matrix P and
/// per-transition increment laws H_ij. Validated on construction: rows of P sum
/// to 1, P is irreducible and aperiodic.
class MarkovKernel {
 public:
  MarkovKernel(Eigen::MatrixXd transition, std::vector<CapacityLaw> laws,
               Attachment attachment = Attachment::destination,
               std::vector<std::string> states = {});

  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  const Eigen::MatrixXd& transition() const { return p_; }
  Attachment attachment() const { return attachment_; }
  const std::vector<CapacityLaw>& laws() const { return laws_; }
  const std::vector<std::string>& states() const { return states_; }
  const CapacityLaw& law(std::size_t i, std::size_t j) const;
  const Eigen::VectorXd& stationary() const { return pi_; }
  std::size_t index_of(const std::string& label) const;
  /// sum_i pi_i sum_j p_ij E[H_ij]
  double mean_increment() const;
  /// True when H_ij does not depend on j, the case with improved delay prefactors.
  bool increments_independent_of_destination() const;

 private:
  Eigen::MatrixXd p_;
  std::vector<CapacityLaw> laws_;
  Attachment attachment_;
  std::vector<std::string> states_;
  Eigen::VectorXd pi_;
};

/// Irreducibility of the nonnegative pattern: (M + I)^(n-1) > 0 entrywise.
bool is_irreducible(const Eigen::MatrixXd& m);
/// Primitivity: M^((n-1)^2 + 1) > 0 entrywise.
bool is_primitive(const Eigen::MatrixXd& m);

/// One uniform drives every slot: C(1) = ... = C(t).
struct Comonotonic {
  CapacityLaw marginal;
};
/// i.i.d. slots.
struct Additive {
  CapacityLaw marginal;
};
/// Slot capacities modulated by a Markov chain. No initial state means the
/// chain starts from its stationary law.
struct MarkovAdditive {
  MarkovKernel kernel;
  std::optional<std::size_t> initial_state;
};
/// Negatively dependent pairs (F^-1(U), F^-1(1 - U)) in consecutive slots,
/// independent across pairs.
struct Antithetic {
  CapacityLaw marginal;
};

using CapacityProcess = std::variant<Comonotonic, Additive, MarkovAdditive, Antithetic>;

std::string structure_name(const CapacityProcess& process);

/// Long-run mean capacity per slot.
double mean_rate(const CapacityProcess& process);

/// Asymptotic cumulant rate lim (1/t) log E[exp(theta S(t))]; +inf when infinite.
double process_cgf(const CapacityProcess& process, double theta);

enum class BoundKind { cdf_lower, cdf_upper, tail_upper, delay_upper, delay_lower };
std::string to_string(BoundKind kind);

struct BoundReport {
  BoundKind kind = BoundKind::cdf_upper;
  double value = 1.0;
  std::optional<double> theta_star;
  double prefactor = 1.0;
  double horizon = std::numeric_limits<double>::infinity();
  std::string notes;
};

/// F_S(t)(x) = F_C(x / t).
double comonotonic_cdf(const Comonotonic& process, std::uint64_t t, double x);

struct FrechetBounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// Distribution-free bounds on P(C_1 + ... + C_t <= x) over all dependence
/// structures with the given marginals. The allocation optimizations run over
/// a grid of `grid` steps of x / grid, so both bounds stay valid.
FrechetBounds frechet_bounds(const std::vector<CapacityLaw>& marginals, double x,
                             std::size_t grid = 1024);

/// Chernoff sandwich of F_S(t)(x) for i.i.d. slots:
/// 1 - e^{t k(th) - th x} <= F <= e^{t k(-th) + th x}, optimized over th > 0.
std::pair<BoundReport, BoundReport> additive_cdf_bounds(const Additive& process, std::uint64_t t,
                                                        double x, const ThetaGrid& grid = {});

/// Perron-Frobenius data of an MGF matrix at theta.
struct SpectralData {
  double theta = 0.0;
  double log_eigenvalue = 0.0;
  Eigen::VectorXd right;
  Eigen::VectorXd left;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Matrix with entries p_ij E[exp(theta Y) | i -> j]. Equals P at theta = 0.
Eigen::MatrixXd mgf_matrix(const MarkovKernel& kernel, double theta);

/// Dominant eigenvalue and eigenvectors of a nonnegative irreducible matrix by
/// power iteration. Normalized with pi . h = 1 when pi is given (otherwise
/// sum h = n) and v . h = 1.
SpectralData perron_frobenius(const Eigen::MatrixXd& m, const Eigen::VectorXd* pi = nullptr);

/// perron_frobenius(mgf_matrix(kernel, theta), stationary law). A one-state
/// kernel short-circuits to the increment cgf so it matches the i.i.d. path.
SpectralData markov_spectral(const MarkovKernel& kernel, double theta);

/// h(J0) / min_j h_j, or (pi . h) / min_j h_j for a stationary start.
double markov_prefactor(const SpectralData& spec, const Eigen::VectorXd& pi,
                        std::optional<std::size_t> initial_state);

/// Markov analog of additive_cdf_bounds with the eigenvector prefactor.
/// `initial_state` overrides the process's own start when given.
std::pair<BoundReport, BoundReport> markov_cdf_bounds(
    const MarkovAdditive& process, std::uint64_t t, double x, const ThetaGrid& grid = {},
    std::optional<std::size_t> initial_state = std::nullopt);

/// Largest entrywise relative gap between M^t by repeated multiplication and by
/// eigendecomposition, at (t, theta) pairs drawn from `seed`.
double matrix_power_self_check(const MarkovKernel& kernel, std::uint64_t seed, int pairs = 3);

struct TransientBounds {
  double c_lower = 0.0;  // P(mean capacity <= c_lower) >= prob_lower
  double c_upper = 0.0;  // P(mean capacity <= c_upper) <= prob_upper
  double prob_lower = 0.0;
  double prob_upper = 1.0;
  double theta_lower = 0.0;  // positive branch
  double theta_upper = 0.0;  // negative branch
  double prefactor_lower = 1.0;
  double prefactor_upper = 1.0;
};

/// Transient capacity quantile bounds for exceedance exponents y_l, y_u > 0.
/// Accepts Additive and MarkovAdditive processes.
TransientBounds transient_bounds(const CapacityProcess& process, std::uint64_t t, double y_l,
                                 double y_u, const ThetaGrid& grid = {});

}  // namespace wnc
