#pragma once

// Checkers for the ellipticity and ballisticity conditions: kappa and (E')_t,
// the Kalikow and small-weight regions, Monte Carlo (P)_M estimates on boxes,
// the AQEE exponent, c0, and negative moments eta_alpha.

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rwre::cond {

using env::EnvironmentLaw;
using lattice::Site;

/// Positive weights alpha(e), one per direction slot.
struct EllipticityWeights {
  std::vector<double> alpha;
  int dim() const { return static_cast<int>(alpha.size() / 2); }
  /// Throws DimensionError on odd/unsupported size, ParameterError on alpha <= 0.
  void validate() const;
};

/// 2 sum_e alpha(e) - max_i (alpha(e_i) + alpha(-e_i)).
double kappa(std::span<const double> alpha);
/// Same formula with Dirichlet parameters as weights.
double dirichlet_kappa(std::span<const double> beta);
/// (E')_t holds iff kappa > t.
bool satisfies_E_prime(std::span<const double> alpha, double t);

/// max_i |beta_i - beta_{i+d}| > 1.
bool check_kalikow_region(std::span<const double> beta);

struct RegionVerdict {
  bool in_region = false;
  double epsilon = 0.0;
  int axis = 0;
  double weight = 0.0;  // beta of the direction opposite to e_axis
  std::string caveat;
};

/// True iff the weight of -e_{axis} is <= epsilon. Epsilon is user supplied:
/// the admissible value is only known to exist. Throws ParameterError unless
/// epsilon is in (0,1).
RegionVerdict check_small_weight_region(std::span<const double> beta, double epsilon, int axis = 0);

/// All directions e with e.v_hat >= 0 carry one common weight alpha_1 and the
/// remaining ones are <= alpha_1.
bool check_E_prime_toward_direction(std::span<const double> alpha, const Eigen::VectorXd& v_hat);
/// Slots e with e.v_hat >= 0.
std::vector<int> half_space_slots(const Eigen::VectorXd& v_hat);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double halfwidth() const { return (hi - lo) / 2; }
};

/// Wilson score interval for k successes out of n; z = 1.96 by default.
Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.959963984540054);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);
/// pass if the interval lies below the threshold, fail if above.
Verdict compare_to_threshold(const Interval& ci, double threshold);

struct PMOptions {
  Eigen::VectorXd l;
  double L = 4;
  std::optional<double> L_tilde;  // default min(70 L^3, L_tilde_cap)
  double L_tilde_cap = 500;
  double M = 1;
  std::int64_t n_walks = 10000;
  std::int64_t horizon = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Environments for the exact annealed cross-check; 0 disables it.
  int exact_environments = 10;
  std::size_t solver_cap = 20000;
};

struct PMReport {
  Eigen::VectorXd l;
  double L = 0;
  double L_tilde = 0;
  double M = 0;
  std::int64_t n_walks = 0;
  std::int64_t non_front = 0;
  std::int64_t censored = 0;  // counted among non_front
  double p_hat = 0;
  Interval ci;
  double threshold = 0;  // L^-M
  Verdict verdict = Verdict::inconclusive;
  /// Mean exact non-front probability over sampled environments.
  std::optional<double> exact_annealed;
  double exact_standard_error = 0;
  int exact_environments = 0;
  /// exact_annealed when computed (it resolves probabilities far below
  /// 1 / n_walks), otherwise p_hat.
  double estimate() const { return exact_annealed.value_or(p_hat); }
};

double default_L_tilde(double L, double cap);

/// Annealed estimate of P_0(walk leaves B_{l,L,L~} other than through the
/// front side): every walk runs in a freshly sampled environment. Throws
/// ParameterError if L < 2 or n_walks < 100.
PMReport estimate_pm(const EnvironmentLaw& law, const PMOptions& opts);

/// g(beta0, beta, zeta) = min{beta + zeta, 3 beta - 2 + (d-1)(beta - beta0)}.
/// Throws ParameterError outside beta0 in (1/2,1), beta in ((beta0+1)/2, 1),
/// zeta in (0, beta0).
double aqee_exponent(int d, double beta0, double beta, double zeta);

/// log10 of c0 = 2/3 * 3^(120 d^4 + 3000 d (log eta)^2).
double c0_log10(int d, double log_eta);

struct EtaEstimate {
  double alpha = 0;
  double value = 0;        // max over the requested slots
  int argmax_slot = 0;
  std::vector<int> slots;
  std::vector<double> per_slot;
  double half_sample_value = 0;  // same maximum from the first half
  double tail_index = 0;         // Hill estimate for omega^-alpha at argmax
  bool divergence_suspected = false;
  std::int64_t n_samples = 0;
};

/// Empirical max_e E[omega(0,e)^-alpha] over `slots`. Divergence is flagged
/// when the Hill tail index of omega^-alpha is below 1 or the estimate moves
/// by more than 10% between half and full sample.
EtaEstimate eta_alpha_estimate(const EnvironmentLaw& law, double alpha, std::span<const int> slots,
                               std::int64_t n_samples, std::uint64_t seed);

/// Dirichlet closed form of E[omega(0,e)^-alpha]; +inf unless alpha < beta_e.
double dirichlet_negative_moment(std::span<const double> beta, int slot, double alpha);

/// Normalized mean endpoint of walks of the given length.
Eigen::VectorXd estimate_direction(const EnvironmentLaw& law, std::int64_t n_walks, std::int64_t horizon,
                                   std::uint64_t seed, unsigned threads = 1);

struct HypothesisOptions {
  std::optional<double> epsilon;
  int small_weight_axis = 0;
  std::optional<Eigen::VectorXd> v_hat;
  /// When set with n > 0, eta_alpha is also estimated by sampling.
  std::optional<EnvironmentLaw> law;
  std::int64_t eta_samples = 0;
  std::uint64_t seed = 1;
};

struct HypothesisReport {
  std::vector<double> weights;
  double kappa_value = 0;
  struct Level {
    std::string name;
    double threshold;
    bool satisfied;
  };
  std::vector<Level> E_prime_levels;
  bool kalikow = false;
  std::optional<RegionVerdict> small_weight;
  bool lln = false;            // kappa > 1
  bool annealed_clt = false;   // kappa > 2
  bool quenched_clt = false;   // kappa > 176 d
  std::optional<bool> E_prime_toward_v_hat;
  double alpha_bar = 0;        // min weight
  /// Closed-form eta_{alpha_bar/2} over all directions (Dirichlet weights).
  double eta_half_alpha_bar = 0;
  double c0_log10 = 0;
  std::optional<EtaEstimate> eta_all;
  std::optional<EtaEstimate> eta_half_space;
  std::vector<std::string> notes;
};

/// Treats `beta` as Dirichlet parameters (which are also the weights alpha).
HypothesisReport hypothesis_report(std::span<const double> beta, const HypothesisOptions& opts = {});

}  // namespace rwre::cond
