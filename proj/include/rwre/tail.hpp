#pragma once

// Heavy-tail exponent estimation (Hill, log-log survival regression) and the
// exactly computable two-site trap exit tail.

#include "rwre/environment.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rwre::regen {

enum class TailMethod { hill, loglog };
std::string to_string(TailMethod m);
TailMethod parse_tail_method(const std::string& s);

struct TailEstimate {
  double exponent = 0.0;
  double standard_error = 0.0;
  TailMethod method = TailMethod::hill;
  /// Hill: number of top order statistics used and k / N.
  std::size_t k = 0;
  double k_fraction = 0.0;
  /// Log-log: the u grid actually used.
  std::vector<double> grid;
  long censored_count = 0;
  std::size_t n_samples = 0;
  /// Hill estimate grows as k shrinks or exceeds 10: the data look light
  /// tailed and the exponent is not meaningful.
  bool light_tail_suspected = false;
};

struct TailOptions {
  /// Hill k; defaults to ceil(N^0.6).
  std::optional<std::size_t> k;
  /// Log-log grid; defaults to `grid_points` geometric points from the
  /// Hill threshold up to the value with `min_at_risk` samples above it,
  /// truncated below the smallest censoring value.
  std::vector<double> grid;
  int grid_points = 25;
  long min_at_risk = 10;
};

inline constexpr std::size_t kMinHillSamples = 1000;

/// Estimates alpha in P(X > u) ~ u^{-alpha}. `censored[i]` marks samples
/// known only to exceed their value (empty span = none censored).
/// Throws InsufficientDataError for too few samples, ParameterError for
/// degenerate (all equal / nonpositive) data.
TailEstimate tail_exponent(std::span<const double> samples, std::span<const bool> censored,
                           TailMethod method, const TailOptions& opts = {});

struct HillPoint {
  std::size_t k;
  double exponent;
  double standard_error;
};
/// Hill estimates for each k (the sensitivity sweep behind a Hill plot).
std::vector<HillPoint> hill_plot(std::span<const double> samples, std::span<const std::size_t> ks);

struct SurvivalPoint {
  double u;
  double survival;
  long at_risk;
};
/// Empirical P(X > u) on the grid; at_risk counts samples > u. Censored
/// samples count as exceeding every u below their value.
std::vector<SurvivalPoint> empirical_survival(std::span<const double> samples,
                                              std::span<const bool> censored,
                                              std::span<const double> grid);

std::vector<double> geometric_grid(double lo, double hi, int points);

/// Least-squares fit of log y on log x; returns (slope, slope standard error
/// from residuals). Nonpositive y are skipped.
std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y);

/// P_omega(T_K > n) for K = {0, e_0}, started at 0, where p = omega(0, e_0)
/// and q = omega(e_0, -e_0): the walk must alternate inside K, so the
/// survival is p^{ceil(n/2)} q^{floor(n/2)}. Returned as a logarithm.
double log_two_site_survival(double log_p, double log_q, std::int64_t n);

enum class TrapPairing {
  /// Sites 0 and e_0 are independent, so E[p^a q^b] = E[p^a] E[q^b]; each
  /// factor is the mean over all draws (every draw of site 0 is paired with
  /// every draw of site e_0).
  factorized,
  /// Draw i of site 0 paired with draw i of site e_0 only.
  paired,
};

struct TrapTailResult {
  std::vector<double> n_grid;
  std::vector<double> survival;
  TailEstimate estimate;
  std::size_t draws = 0;
  TrapPairing pairing = TrapPairing::factorized;
};

/// Annealed survival of the two-site trap exit time T_K, K = {0, e_0}, from
/// the exact quenched survival of `draws` sampled environments, and its
/// log-log tail exponent over n_grid.
TrapTailResult trap_exit_tail(const env::EnvironmentLaw& law, int e0_slot,
                              std::span<const double> n_grid, std::size_t draws,
                              std::uint64_t seed, unsigned threads = 1,
                              TrapPairing pairing = TrapPairing::factorized);

}  // namespace rwre::regen
