#include "rwre/errors.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/tail.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

using namespace rwre;
using namespace rwre::regen;
using env::EnvironmentLaw;
using env::QuenchedEnvironment;
using lattice::Site;

namespace {

Eigen::VectorXd e1(int d) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v[0] = 1;
  return v;
}

walk::Trajectory path_of(int d, std::vector<std::uint8_t> steps) {
  walk::Trajectory t;
  t.start = Site(d);
  t.steps = std::move(steps);
  return t;
}

std::vector<double> pareto(double alpha, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = std::pow(rng.uniform_open(), -1.0 / alpha);
  return x;
}

// Two-site survival by explicit powers of the substochastic transfer matrix.
double matrix_power_survival(double p, double q, int n) {
  Eigen::Matrix2d Q;
  Q << 0, p, q, 0;
  Eigen::Vector2d v(1, 0);
  for (int k = 0; k < n; ++k) v = Q.transpose() * v;
  return v.sum();
}

}  // namespace

TEST_CASE("regeneration config validation") {
  const auto cfg = RegenConfig::make(e1(2), 100);
  CHECK(cfg.a == doctest::Approx(2 * std::sqrt(2.0) + 0.5));
  CHECK(cfg.confirmation_depth == doctest::Approx(50 * cfg.a));
  CHECK_THROWS_AS(RegenConfig::make(e1(2), 100, 2.8).validate(), ParameterError);
  CHECK_THROWS_AS(RegenConfig::make(e1(2), 0).validate(), ParameterError);
  Eigen::VectorXd bad(2);
  bad << 1, 1;
  CHECK_THROWS_AS(RegenConfig::make(bad, 10).validate(), ParameterError);
}

TEST_CASE("monotone path regenerates at ceil(a)") {
  const auto cfg = RegenConfig::make(e1(2), 200, 3.4, 10.0);
  const auto rec = find_regenerations(path_of(2, std::vector<std::uint8_t>(200, 0)), cfg);
  REQUIRE(rec.times.size() >= 2);
  CHECK(rec.times[0] == 4);
  CHECK(rec.times[1] == 8);
  for (auto g : rec.gaps()) CHECK(g == 4);

  // in a near-deterministic environment the same holds for the simulated walk
  const QuenchedEnvironment env(EnvironmentLaw::constant({1 - 3e-9, 1e-9, 1e-9, 1e-9}), 1);
  Rng rng(1);
  const auto sim = find_regenerations(env, Site{0, 0}, cfg, rng);
  REQUIRE_FALSE(sim.times.empty());
  CHECK(sim.times[0] == 4);
}

TEST_CASE("backtrack after the first candidate moves tau_1 to the next candidate") {
  // a = 3.4: S_1 = 4, then one step back (D = 5), M = 4, S_2 = first level >= 7.4
  std::vector<std::uint8_t> steps(4, 0);
  steps.push_back(2);
  for (int i = 0; i < 100; ++i) steps.push_back(0);
  const auto cfg = RegenConfig::make(e1(2), 105, 3.4, 10.0);
  const auto rec = find_regenerations(path_of(2, steps), cfg);
  REQUIRE_FALSE(rec.times.empty());
  // level 8 is reached at time 4 + 1 + 5 = 10
  CHECK(rec.times[0] == 10);
  CHECK(rec.levels[0] == 8.0);
}

TEST_CASE("regeneration property and horizon monotonicity") {
  const QuenchedEnvironment env(EnvironmentLaw::dirichlet({1.5, 0.4, 0.2, 0.4}), 5);
  for (std::uint64_t w = 0; w < 10; ++w) {
    Rng rng = walk::walker_rng(5, w);
    const auto path = walk::walk(env, Site{0, 0}, 20000, rng);
    const auto cfg = RegenConfig::make(e1(2), 20000);
    const auto rec = find_regenerations(path, cfg);
    const auto level = path.projections(e1(2));
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      const auto t = static_cast<std::size_t>(rec.times[k]);
      REQUIRE(rec.levels[k] == level[t]);
      for (std::size_t n = t + 1; n < level.size(); ++n) REQUIRE(level[n] >= level[t]);
    }
    for (auto g : rec.gaps()) REQUIRE(g > 0);

    walk::Trajectory shorter = path;
    shorter.steps.resize(10000);
    const auto part = find_regenerations(shorter, cfg);
    for (auto t : part.times) REQUIRE(std::find(rec.times.begin(), rec.times.end(), t) != rec.times.end());
  }
}

TEST_CASE("symmetric environment yields censored records") {
  const QuenchedEnvironment env(EnvironmentLaw::uniform(2), 3);
  int censored = 0;
  for (std::uint64_t w = 0; w < 20; ++w) {
    Rng rng = walk::walker_rng(3, w);
    const auto rec = find_regenerations(env, Site{0, 0}, RegenConfig::make(e1(2), 2000), rng);
    if (rec.censored_tail) ++censored;
  }
  CHECK(censored == 20);
}

TEST_CASE("renewal statistics on synthetic records") {
  RegenerationRecord rec;
  for (int k = 0; k < 10; ++k) {
    rec.times.push_back(7 + 5 * k);
    rec.positions.push_back(Site{2 + 3 * k, 0});
    rec.levels.push_back(2 + 3 * k);
  }
  const std::vector<RegenerationRecord> recs{rec, rec};
  const auto st = renewal_statistics(recs);
  CHECK(st.velocity[0] == doctest::Approx(0.6));
  CHECK(st.velocity[1] == 0.0);
  CHECK(st.gap_mean == 5.0);
  CHECK(st.gap_second_moment == 25.0);
  CHECK(st.n_gaps == 18);

  RegenerationRecord empty;
  const std::vector<RegenerationRecord> none{empty, empty};
  CHECK_THROWS_AS(renewal_statistics(none), InsufficientDataError);
}

TEST_CASE("hill and log-log recover pareto exponents") {
  for (double alpha : {1.0, 2.0, 3.0}) {
    const auto x = pareto(alpha, 100000, 11 + static_cast<std::uint64_t>(alpha));
    const auto h = tail_exponent(x, {}, TailMethod::hill);
    const auto g = tail_exponent(x, {}, TailMethod::loglog);
    CHECK(std::abs(h.exponent - alpha) <= 3 * h.standard_error);
    CHECK(std::abs(g.exponent - alpha) <= 3 * g.standard_error);
    CHECK(h.standard_error > 0);
  }
  const auto x = pareto(2.0, 100000, 1);
  CHECK(std::abs(tail_exponent(x, {}, TailMethod::hill).exponent - 2.0) < 0.15);
}

TEST_CASE("tail estimator diagnostics and errors") {
  Rng rng(2);
  std::vector<double> expo(100000);
  for (auto& v : expo) v = -std::log(rng.uniform_open());
  const auto h = tail_exponent(expo, {}, TailMethod::hill);
  CHECK(h.light_tail_suspected);

  const std::vector<double> flat(5000, 3.0);
  CHECK_THROWS_AS(tail_exponent(flat, {}, TailMethod::hill), ParameterError);
  const std::vector<double> few{1, 2, 3};
  CHECK_THROWS_AS(tail_exponent(few, {}, TailMethod::hill), InsufficientDataError);

  const auto x = pareto(2.0, 2000, 3);
  std::unique_ptr<bool[]> cens(new bool[x.size()]);
  std::fill(cens.get(), cens.get() + x.size(), true);
  try {
    tail_exponent(x, std::span<const bool>(cens.get(), x.size()), TailMethod::loglog);
    FAIL("expected insufficient data");
  } catch (const InsufficientDataError& e) {
    CHECK(e.censored() == 2000);
  }
}

TEST_CASE("empirical survival counts censored samples as exceeding") {
  const std::vector<double> x{1, 2, 3, 4};
  const bool c[] = {false, true, false, false};
  const std::vector<double> grid{0.5, 2.5, 3.5};
  const auto s = empirical_survival(x, c, grid);
  CHECK(s[0].survival == 1.0);
  CHECK(s[1].at_risk == 2);
  CHECK(s[2].survival == 0.25);
}

TEST_CASE("two-site survival matches matrix powers") {
  for (double p : {0.1, 0.5, 0.9})
    for (double q : {0.05, 0.4, 0.7})
      for (int n : {0, 1, 2, 5, 10, 37}) {
        const double exact = matrix_power_survival(p, q, n);
        REQUIRE(std::exp(log_two_site_survival(std::log(p), std::log(q), n)) ==
                doctest::Approx(exact).epsilon(1e-12));
      }
}

TEST_CASE("trap tail: survival bound and exponent") {
  // every exit probability at least 1/2: survival <= 2^-n
  const auto law = EnvironmentLaw::constant({0.125, 0.125, 0.5, 0.25});
  const std::vector<double> grid{2, 4, 8, 16, 32};
  const auto r = trap_exit_tail(law, 0, grid, 10, 1);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(r.survival[k] <= std::pow(0.5, grid[k]) * (1 + 1e-12));

  const auto dl = EnvironmentLaw::dirichlet({1.5, 0.4, 0.2, 0.4});
  // beyond n ~ 300 the sampled q = omega(e1, -e1) never gets close enough
  // to 1 for 10^6 draws to resolve E[q^n] ~ n^-2.3
  std::vector<double> ng;
  for (int i = 0; i < 20; ++i) ng.push_back(std::round(20 * std::pow(15.0, i / 19.0)));
  const auto t = trap_exit_tail(dl, 0, ng, 1000000, 4);
  CHECK(std::abs(t.estimate.exponent - 3.3) < 0.5);
}
