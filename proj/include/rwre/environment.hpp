#pragma once

// i.i.d. environment laws and lazily realized quenched environments.

#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace rwre::env {

using lattice::kMaxDim;
using lattice::Site;

/// Transition probabilities omega(x, .) at one site, indexed by direction
/// slot (see lattice::Direction).
class SiteDistribution {
 public:
  SiteDistribution() = default;
  explicit SiteDistribution(std::span<const double> probs);

  int dim() const { return dim_; }
  int size() const { return 2 * dim_; }
  double operator[](int slot) const { return p_[slot]; }
  std::span<const double> probs() const { return {p_.data(), static_cast<std::size_t>(size())}; }

  double sum() const;
  /// True iff every entry lies in (0,1) and the entries sum to 1 within tol.
  bool is_elliptic(double tol = 1e-12) const;
  bool operator==(const SiteDistribution& o) const;

 private:
  std::array<double, 2 * kMaxDim> p_{};
  int dim_ = 0;
};

/// Local drift d(x, omega) = sum_e omega(x, e) e.
Eigen::VectorXd drift(const SiteDistribution& dist);

/// phi = scale * U^power with U uniform on (0,1). The default (1/4, 2) has
/// E[phi^{-1/2}] = infinity and E[phi^{-(1/2 - eps)}] finite.
struct PhiLaw {
  double scale = 0.25;
  double power = 2.0;
  double sample(Rng& rng) const;
};

struct DirichletLaw {
  std::vector<double> beta;
};

/// Marginal-nestling family with omega(e_1) = r * omega(-e_1). The mass on
/// the e_1 axis and its complement come from the base sub-law.
struct RatioLaw {
  /// Axis mass m ~ uniform(mass_lo, mass_hi); the remaining 1 - m is split
  /// over the 2d - 2 transverse directions by Dirichlet(transverse_beta).
  struct DirichletBase {
    double mass_lo = 0.1;
    double mass_hi = 0.9;
    std::vector<double> transverse_beta;
  };
  /// d = 2 only: m = 3 phi, transverse split as in the nonballistic law below.
  struct NonballisticBase {
    PhiLaw phi;
  };

  double r = 2.0;
  std::variant<DirichletBase, NonballisticBase> base;
};

/// Transient in direction e_1 but not ballistic when E[phi^{-1/2}] = infinity.
/// omega(e_1) = 2 phi, omega(-e_1) = phi, omega(e_2) = X phi + (1-X)(1-4 phi),
/// omega(-e_2) = X (1-4 phi) + (1-X) phi with X a fair coin. d = 2.
struct NonballisticLaw {
  PhiLaw phi;
};

struct UniformLaw {
  int dim = 2;
};

/// The same (elliptic) distribution at every site.
struct ConstantLaw {
  std::vector<double> probs;
};

using LawVariant = std::variant<DirichletLaw, RatioLaw, NonballisticLaw, UniformLaw, ConstantLaw>;

/// A validated, immutable i.i.d. law on site distributions.
class EnvironmentLaw {
 public:
  explicit EnvironmentLaw(LawVariant v);

  static EnvironmentLaw dirichlet(std::vector<double> beta);
  static EnvironmentLaw uniform(int d);
  static EnvironmentLaw constant(std::vector<double> probs);
  static EnvironmentLaw nonballistic(PhiLaw phi = {});
  static EnvironmentLaw ratio(double r, RatioLaw::DirichletBase base);
  static EnvironmentLaw ratio(double r, RatioLaw::NonballisticBase base);

  int dim() const { return dim_; }
  const LawVariant& variant() const { return v_; }
  /// Variant tag used in configs and reports.
  std::string tag() const;

  SiteDistribution sample(Rng& rng) const;

 private:
  LawVariant v_;
  int dim_ = 0;
};

/// Gamma(shape, 1) variate; Marsaglia-Tsang, with the U^{1/shape} boost for
/// shape < 1.
double sample_gamma(double shape, Rng& rng);
/// log of a Gamma(shape, 1) variate, accurate for very small shapes whose
/// variates underflow.
double sample_log_gamma(double shape, Rng& rng);

/// Dirichlet(beta) on the open simplex; computed in log space. Throws
/// ParameterError if any beta_i <= 0.
SiteDistribution sample_dirichlet(std::span<const double> beta, Rng& rng);
SiteDistribution sample_nonballistic(const PhiLaw& phi, Rng& rng);
/// Builds omega from an already sampled phi and coin (X = 1 if coin).
SiteDistribution nonballistic_distribution(double phi, bool coin);
SiteDistribution sample_ratio_law(double r, const RatioLaw::DirichletBase& base, Rng& rng);
SiteDistribution sample_ratio_law(double r, const RatioLaw::NonballisticBase& base, Rng& rng);
/// omega(e_1) = r m / (1+r), omega(-e_1) = m / (1+r), transverse = (1-m) * split.
SiteDistribution ratio_distribution(double r, double axis_mass, std::span<const double> transverse);

/// A realization of the law over Z^d. site(x) is a pure function of
/// (law, master seed, x); realized sites are cached. Safe for concurrent
/// queries.
class QuenchedEnvironment {
 public:
  QuenchedEnvironment(EnvironmentLaw law, std::uint64_t master_seed);

  const EnvironmentLaw& law() const { return law_; }
  std::uint64_t master_seed() const { return seed_; }
  int dim() const { return law_.dim(); }

  SiteDistribution site(const Site& x) const;
  /// Realized site count (memory grows linearly in it).
  std::size_t cached_sites() const;
  /// Approximate cache footprint in bytes.
  std::size_t memory_bytes() const;

 private:
  static constexpr std::size_t kShards = 16;
  struct Shard {
    mutable std::mutex mutex;
    std::unordered_map<Site, SiteDistribution, lattice::SiteHash> cache;
  };

  EnvironmentLaw law_;
  std::uint64_t seed_;
  std::unique_ptr<Shard[]> shards_;
};

/// Seed of the stream that realizes site x.
std::uint64_t site_seed(std::uint64_t master_seed, const Site& x);

}  // namespace rwre::env
