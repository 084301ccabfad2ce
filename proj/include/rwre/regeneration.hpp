#pragma once

// Regeneration times along a direction l, via the S/R/M recursion, and the
// renewal statistics built on them.

#include "rwre/environment.hpp"
#include "rwre/walker.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rwre::regen {

using lattice::Site;

struct RegenConfig {
  Eigen::VectorXd direction;
  /// Level increment; must exceed 2 sqrt(d).
  double a = 0.0;
  std::int64_t horizon = 0;
  /// A candidate is confirmed only if the walk ends at least this far ahead
  /// of it in direction l. Finite-horizon stand-in for R_k = infinity.
  double confirmation_depth = 0.0;

  /// a defaults to 2 sqrt(d) + 0.5 and the depth to 50 a.
  static RegenConfig make(const Eigen::VectorXd& direction, std::int64_t horizon,
                          std::optional<double> a = std::nullopt,
                          std::optional<double> depth = std::nullopt);
  /// Throws ParameterError on a <= 2 sqrt(d), non-unit direction, horizon < 1.
  void validate() const;
};

struct RegenerationRecord {
  /// tau_1 < tau_2 < ...
  std::vector<std::int64_t> times;
  std::vector<Site> positions;
  /// X_{tau_k} . l
  std::vector<double> levels;
  /// True when the last candidate could not be confirmed before the horizon
  /// (always the case unless the path was exhausted exactly at a
  /// regeneration).
  bool censored_tail = true;
  std::int64_t horizon = 0;
  Site end;

  /// tau_{k+1} - tau_k for k >= 1. The first regeneration tau_1 is not a
  /// gap and never enters i.i.d. statistics.
  std::vector<std::int64_t> gaps() const;
  std::vector<Eigen::VectorXd> displacement_gaps() const;
};

/// Regenerations of a recorded path.
RegenerationRecord find_regenerations(const walk::Trajectory& path, const RegenConfig& cfg);
/// Simulates `cfg.horizon` steps of the quenched walk and analyses them.
RegenerationRecord find_regenerations(const env::QuenchedEnvironment& env, const Site& start,
                                      const RegenConfig& cfg, Rng& rng);

/// Regeneration indices from the level sequence X_n . l alone.
std::vector<std::int64_t> regeneration_indices(std::span<const double> level, double a,
                                               double confirmation_depth, bool* censored_tail);

struct RenewalStats {
  Eigen::VectorXd velocity;
  /// Delta-method standard error of each velocity component.
  Eigen::VectorXd velocity_se;
  double gap_mean = 0.0;
  double gap_second_moment = 0.0;
  /// Renewal CLT covariance E[(dX - v dtau)(dX - v dtau)^T] / E[dtau].
  Eigen::MatrixXd covariance;
  std::size_t n_gaps = 0;
  std::size_t records_used = 0;
  long censored_records = 0;
};

/// Pools the i.i.d. gaps of all records. Throws InsufficientDataError when no
/// record has two regenerations.
RenewalStats renewal_statistics(std::span<const RegenerationRecord> records);

}  // namespace rwre::regen
