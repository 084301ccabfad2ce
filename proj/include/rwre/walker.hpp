#pragma once

// Quenched walks with stopping-time instrumentation, and an exact
// absorbing-chain solver for exit distributions on finite regions.

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace rwre::walk {

using env::QuenchedEnvironment;
using env::SiteDistribution;
using lattice::Site;

/// A nearest-neighbour path stored as direction slots.
struct Trajectory {
  Site start;
  std::vector<std::uint8_t> steps;
  /// Set when the walk stopped because it reached its horizon.
  bool horizon_hit = false;

  std::size_t length() const { return steps.size(); }
  std::vector<Site> positions() const;
  Site end() const;
  /// X_n . l for n = 0..length().
  std::vector<double> projections(const Eigen::VectorXd& l) const;
};

/// Stream for walker `walker_id`; disjoint from every environment stream.
Rng walker_rng(std::uint64_t master_seed, std::uint64_t walker_id);

/// Samples a direction slot from the site distribution.
int choose_slot(const SiteDistribution& dist, Rng& rng);
Site step(const QuenchedEnvironment& env, const Site& x, Rng& rng);

/// Exactly `horizon` steps from `start`.
Trajectory walk(const QuenchedEnvironment& env, const Site& start, std::int64_t horizon, Rng& rng);

/// Same as walk(), but only records X_n . l (cheaper for long runs).
struct ProjectedPath {
  std::vector<double> level;  // X_n . l, n = 0..horizon
  Site end;
};
ProjectedPath walk_projected(const QuenchedEnvironment& env, const Site& start,
                             const Eigen::VectorXd& l, std::int64_t horizon, Rng& rng);

using Region = std::function<bool(const Site&)>;

struct ExitRun {
  Trajectory trajectory;
  /// First position outside the region; empty when censored at the horizon.
  std::optional<Site> exit_site;
  bool censored() const { return !exit_site.has_value(); }
};

/// Runs until the first exit from `region` or `horizon` steps. Throws
/// ContractError if start is not in the region.
ExitRun run_until_exit(const QuenchedEnvironment& env, const Site& start, const Region& region,
                       std::int64_t horizon, Rng& rng);

struct ExitDistribution {
  std::vector<Site> sites;
  std::vector<double> probs;

  double total() const;
  /// Probability of exiting at x (0 if x is not a boundary site).
  double prob(const Site& x) const;
};

inline constexpr std::size_t kDefaultSolverCap = 20000;

/// Exit distribution of the quenched walk from `start` out of the finite
/// `region`, from the harmonic system h(x) = sum_e omega(x,e) h(x+e).
/// Throws ContractError if start is not in the region, ParameterError if the
/// region exceeds `cap` sites, NumericError if the solve fails.
ExitDistribution exact_exit_distribution(const QuenchedEnvironment& env,
                                         std::span<const Site> region, const Site& start,
                                         std::size_t cap = kDefaultSolverCap);
/// Same with an explicit site -> distribution map.
ExitDistribution exact_exit_distribution(const std::function<SiteDistribution(const Site&)>& omega,
                                         std::span<const Site> region, const Site& start,
                                         std::size_t cap = kDefaultSolverCap);

struct StoppingTimes {
  /// T_A; empty if no region was given or the walk never left it.
  std::optional<std::int64_t> exit_time;
  /// T^l_u = inf{n : X_n . l >= u}, one per requested level.
  std::vector<std::optional<std::int64_t>> level_times;
  /// T~^l_u = inf{n : X_n . l <= u}, one per requested level.
  std::vector<std::optional<std::int64_t>> lower_level_times;
  /// D^l = inf{n : X_n . l < X_0 . l}.
  std::optional<std::int64_t> backtrack_time;
};

StoppingTimes detect_stopping_times(const Trajectory& trajectory, const Eigen::VectorXd& l,
                                    std::span<const double> levels,
                                    const Region& region = nullptr);

}  // namespace rwre::walk
