#include "rwre/environment.hpp"

#include "rwre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rwre::env {

SiteDistribution::SiteDistribution(std::span<const double> probs) {
  if (probs.size() % 2 != 0) throw DimensionError("site distribution needs 2d entries");
  dim_ = static_cast<int>(probs.size() / 2);
  lattice::require_dimension(dim_);
  std::copy(probs.begin(), probs.end(), p_.begin());
}

double SiteDistribution::sum() const {
  double s = 0.0;
  for (double v : probs()) s += v;
  return s;
}

bool SiteDistribution::is_elliptic(double tol) const {
  for (double v : probs())
    if (!(v > 0.0 && v < 1.0)) return false;
  return std::abs(sum() - 1.0) <= tol;
}

bool SiteDistribution::operator==(const SiteDistribution& o) const {
  return dim_ == o.dim_ && std::equal(p_.begin(), p_.begin() + size(), o.p_.begin());
}

Eigen::VectorXd drift(const SiteDistribution& dist) {
  const int d = dist.dim();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (int a = 0; a < d; ++a) v[a] = dist[a] - dist[a + d];
  return v;
}

double PhiLaw::sample(Rng& rng) const {
  const double phi = scale * std::pow(rng.uniform_open(), power);
  if (!(phi > 0.0 && phi < 0.25))
    throw ParameterError("phi sample " + std::to_string(phi) + " outside (0, 1/4)");
  return phi;
}

// ---------------------------------------------------------------------------
// Gamma and Dirichlet

namespace {

// Marsaglia & Tsang (2000), shape >= 1.
double gamma_mt(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void check_positive(std::span<const double> w, const char* what) {
  for (double b : w)
    if (!(b > 0.0) || !std::isfinite(b))
      throw ParameterError(std::string(what) + " must be positive and finite, got " +
                           std::to_string(b));
}

// Normalizes exp(logs) onto the simplex; entries that underflow are clamped
// to the smallest normal double so ellipticity survives.
void normalize_logs(std::span<double> logs) {
  const double m = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double& v : logs) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : logs) v = std::max(v / s, std::numeric_limits<double>::min());
}

}  // namespace

double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw ParameterError("gamma shape must be positive");
  if (shape >= 1.0) return gamma_mt(shape, rng);
  return gamma_mt(shape + 1.0, rng) * std::pow(rng.uniform_open(), 1.0 / shape);
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw ParameterError("gamma shape must be positive");
  if (shape >= 1.0) return std::log(gamma_mt(shape, rng));
  return std::log(gamma_mt(shape + 1.0, rng)) + std::log(rng.uniform_open()) / shape;
}

SiteDistribution sample_dirichlet(std::span<const double> beta, Rng& rng) {
  check_positive(beta, "Dirichlet parameters");
  if (beta.size() > 2 * kMaxDim) throw DimensionError("too many Dirichlet parameters");
  std::array<double, 2 * kMaxDim> logs{};
  for (std::size_t i = 0; i < beta.size(); ++i) logs[i] = sample_log_gamma(beta[i], rng);
  std::span<double> s(logs.data(), beta.size());
  normalize_logs(s);
  return SiteDistribution(s);
}

SiteDistribution nonballistic_distribution(double phi, bool coin) {
  if (!(phi > 0.0 && phi < 0.25)) throw ParameterError("phi must lie in (0, 1/4)");
  const double X = coin ? 1.0 : 0.0;
  const double p[4] = {2.0 * phi, X * phi + (1.0 - X) * (1.0 - 4.0 * phi), phi,
                       X * (1.0 - 4.0 * phi) + (1.0 - X) * phi};
  return SiteDistribution(p);
}

SiteDistribution sample_nonballistic(const PhiLaw& phi, Rng& rng) {
  const double f = phi.sample(rng);
  const bool coin = (rng() >> 63) != 0;
  return nonballistic_distribution(f, coin);
}

SiteDistribution ratio_distribution(double r, double axis_mass, std::span<const double> transverse) {
  if (!(r > 1.0)) throw ParameterError("ratio r must exceed 1");
  if (!(axis_mass > 0.0 && axis_mass < 1.0)) throw ParameterError("axis mass must lie in (0,1)");
  const int d = static_cast<int>(transverse.size() / 2) + 1;
  if (static_cast<int>(transverse.size()) != 2 * d - 2)
    throw DimensionError("transverse split needs 2d - 2 entries");
  std::array<double, 2 * kMaxDim> p{};
  const double back = axis_mass / (1.0 + r);
  p[0] = r * back;
  p[d] = back;
  // Transverse slots in order: e_2..e_d, -e_2..-e_d.
  for (int a = 1; a < d; ++a) {
    p[a] = (1.0 - axis_mass) * transverse[a - 1];
    p[a + d] = (1.0 - axis_mass) * transverse[a - 1 + (d - 1)];
  }
  return SiteDistribution(std::span<const double>(p.data(), 2 * d));
}

SiteDistribution sample_ratio_law(double r, const RatioLaw::DirichletBase& base, Rng& rng) {
  const double m = base.mass_lo + (base.mass_hi - base.mass_lo) * rng.uniform_open();
  const auto& beta = base.transverse_beta;
  check_positive(beta, "transverse Dirichlet parameters");
  std::array<double, 2 * kMaxDim> split{};
  for (std::size_t i = 0; i < beta.size(); ++i) split[i] = sample_log_gamma(beta[i], rng);
  std::span<double> s(split.data(), beta.size());
  normalize_logs(s);
  return ratio_distribution(r, m, s);
}

SiteDistribution sample_ratio_law(double r, const RatioLaw::NonballisticBase& base, Rng& rng) {
  const double phi = base.phi.sample(rng);
  const bool coin = (rng() >> 63) != 0;
  const double m = 3.0 * phi;
  const double up = coin ? phi : 1.0 - 4.0 * phi;
  const double split[2] = {up / (1.0 - m), 1.0 - up / (1.0 - m)};
  return ratio_distribution(r, m, split);
}

// ---------------------------------------------------------------------------
// EnvironmentLaw

namespace {

void validate_phi(const PhiLaw& phi) {
  if (!(phi.scale > 0.0 && phi.scale <= 0.25)) throw ParameterError("phi scale must lie in (0, 1/4]");
  if (!(phi.power > 0.0)) throw ParameterError("phi power must be positive");
}

struct Validator {
  int operator()(const DirichletLaw& l) const {
    if (l.beta.size() % 2 != 0) throw DimensionError("Dirichlet law needs 2d parameters");
    const int d = static_cast<int>(l.beta.size() / 2);
    lattice::require_dimension(d);
    check_positive(l.beta, "Dirichlet parameters");
    return d;
  }
  int operator()(const RatioLaw& l) const {
    if (!(l.r > 1.0)) throw ParameterError("ratio law requires r > 1");
    if (const auto* b = std::get_if<RatioLaw::DirichletBase>(&l.base)) {
      if (!(b->mass_lo > 0.0 && b->mass_lo <= b->mass_hi && b->mass_hi < 1.0))
        throw ParameterError("ratio law axis mass range must satisfy 0 < lo <= hi < 1");
      if (b->transverse_beta.size() % 2 != 0)
        throw DimensionError("ratio law transverse parameters need 2d - 2 entries");
      check_positive(b->transverse_beta, "transverse parameters");
      const int d = static_cast<int>(b->transverse_beta.size() / 2) + 1;
      lattice::require_dimension(d);
      return d;
    }
    validate_phi(std::get<RatioLaw::NonballisticBase>(l.base).phi);
    return 2;
  }
  int operator()(const NonballisticLaw& l) const {
    validate_phi(l.phi);
    return 2;
  }
  int operator()(const UniformLaw& l) const {
    lattice::require_dimension(l.dim);
    return l.dim;
  }
  int operator()(const ConstantLaw& l) const {
    const SiteDistribution s(l.probs);
    if (!s.is_elliptic(1e-12))
      throw ParameterError("constant law must be elliptic and sum to 1");
    return s.dim();
  }
};

struct Sampler {
  Rng& rng;
  SiteDistribution operator()(const DirichletLaw& l) const { return sample_dirichlet(l.beta, rng); }
  SiteDistribution operator()(const RatioLaw& l) const {
    return std::visit([&](const auto& b) { return sample_ratio_law(l.r, b, rng); }, l.base);
  }
  SiteDistribution operator()(const NonballisticLaw& l) const { return sample_nonballistic(l.phi, rng); }
  SiteDistribution operator()(const UniformLaw& l) const {
    std::array<double, 2 * kMaxDim> p{};
    std::fill_n(p.begin(), 2 * l.dim, 1.0 / (2 * l.dim));
    return SiteDistribution(std::span<const double>(p.data(), 2 * l.dim));
  }
  SiteDistribution operator()(const ConstantLaw& l) const { return SiteDistribution(l.probs); }
};

}  // namespace

EnvironmentLaw::EnvironmentLaw(LawVariant v) : v_(std::move(v)) {
  dim_ = std::visit(Validator{}, v_);
}

EnvironmentLaw EnvironmentLaw::dirichlet(std::vector<double> beta) {
  return EnvironmentLaw(DirichletLaw{std::move(beta)});
}
EnvironmentLaw EnvironmentLaw::uniform(int d) { return EnvironmentLaw(UniformLaw{d}); }
EnvironmentLaw EnvironmentLaw::constant(std::vector<double> probs) {
  return EnvironmentLaw(ConstantLaw{std::move(probs)});
}
EnvironmentLaw EnvironmentLaw::nonballistic(PhiLaw phi) { return EnvironmentLaw(NonballisticLaw{phi}); }
EnvironmentLaw EnvironmentLaw::ratio(double r, RatioLaw::DirichletBase base) {
  return EnvironmentLaw(RatioLaw{r, std::move(base)});
}
EnvironmentLaw EnvironmentLaw::ratio(double r, RatioLaw::NonballisticBase base) {
  return EnvironmentLaw(RatioLaw{r, base});
}

std::string EnvironmentLaw::tag() const {
  struct Tag {
    std::string operator()(const DirichletLaw&) const { return "dirichlet"; }
    std::string operator()(const RatioLaw&) const { return "ratio"; }
    std::string operator()(const NonballisticLaw&) const { return "nonballistic"; }
    std::string operator()(const UniformLaw&) const { return "uniform"; }
    std::string operator()(const ConstantLaw&) const { return "constant"; }
  };
  return std::visit(Tag{}, v_);
}

SiteDistribution EnvironmentLaw::sample(Rng& rng) const { return std::visit(Sampler{rng}, v_); }

// ---------------------------------------------------------------------------
// QuenchedEnvironment

std::uint64_t site_seed(std::uint64_t master_seed, const Site& x) {
  return hash_words(domain_seed(master_seed, SeedDomain::environment, x.dim()),
                    std::span<const std::int64_t>(x.data(), static_cast<std::size_t>(x.dim())));
}

QuenchedEnvironment::QuenchedEnvironment(EnvironmentLaw law, std::uint64_t master_seed)
    : law_(std::move(law)), seed_(master_seed), shards_(new Shard[kShards]) {}

SiteDistribution QuenchedEnvironment::site(const Site& x) const {
  if (x.dim() != dim()) throw DimensionError("site dimension does not match environment");
  const std::size_t h = lattice::SiteHash{}(x);
  Shard& shard = shards_[h % kShards];
  {
    std::lock_guard lock(shard.mutex);
    if (auto it = shard.cache.find(x); it != shard.cache.end()) return it->second;
  }
  Rng rng(site_seed(seed_, x));
  const SiteDistribution value = law_.sample(rng);
  std::lock_guard lock(shard.mutex);
  return shard.cache.try_emplace(x, value).first->second;
}

std::size_t QuenchedEnvironment::cached_sites() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kShards; ++i) {
    std::lock_guard lock(shards_[i].mutex);
    n += shards_[i].cache.size();
  }
  return n;
}

std::size_t QuenchedEnvironment::memory_bytes() const {
  // Node payload plus bucket and allocator overhead.
  return cached_sites() * (sizeof(Site) + sizeof(SiteDistribution) + 4 * sizeof(void*));
}

}  // namespace rwre::env
