#include "rwre/environment.hpp"
#include "rwre/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace rwre;
using namespace rwre::env;
using lattice::Site;

TEST_CASE("dirichlet sampler is reproducible and lands in the open simplex") {
  const std::vector<double> beta{1, 1, 1, 1};
  Rng a(42), b(42);
  const auto x = sample_dirichlet(beta, a);
  const auto y = sample_dirichlet(beta, b);
  CHECK(x == y);
  CHECK(x.is_elliptic());
  CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> bad{1, 0, 1, 1};
  CHECK_THROWS_AS(sample_dirichlet(bad, a), ParameterError);
  const std::vector<double> neg{1, -1, 1, 1};
  CHECK_THROWS_AS(EnvironmentLaw::dirichlet(neg), ParameterError);
}

TEST_CASE("dirichlet moments") {
  Rng rng(1);
  const std::vector<double> beta{1, 2, 3, 4};
  const int n = 200000;
  std::vector<double> mean(4, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto s = sample_dirichlet(beta, rng);
    REQUIRE(s.is_elliptic());
    for (int k = 0; k < 4; ++k) mean[k] += s[k] / n;
  }
  for (int k = 0; k < 4; ++k) CHECK(std::abs(mean[k] - beta[k] / 10.0) < 0.005);

  // variance beta_i (B - beta_i) / (B^2 (B + 1)); for beta = 100 the std is about 0.0216
  const std::vector<double> flat{100, 100, 100, 100};
  std::vector<double> m(4, 0.0), m2(4, 0.0);
  const int n2 = 20000;
  for (int i = 0; i < n2; ++i) {
    const auto s = sample_dirichlet(flat, rng);
    for (int k = 0; k < 4; ++k) {
      m[k] += s[k] / n2;
      m2[k] += s[k] * s[k] / n2;
    }
  }
  const double oracle = std::sqrt(100.0 * 300.0 / (400.0 * 400.0 * 401.0));
  for (int k = 0; k < 4; ++k) {
    const double sd = std::sqrt(m2[k] - m[k] * m[k]);
    CHECK(sd < 0.05);
    CHECK(sd == doctest::Approx(oracle).epsilon(0.05));
    CHECK(std::abs(m[k] - 0.25) < 0.002);
  }
}

TEST_CASE("small dirichlet parameters stay elliptic") {
  Rng rng(3);
  for (const auto& beta : {std::vector<double>{1, 1, 1, 0.05}, std::vector<double>{0.3, 0.3, 0.3, 0.3}}) {
    for (int i = 0; i < 20000; ++i) {
      const auto s = sample_dirichlet(beta, rng);
      REQUIRE(s.is_elliptic());
    }
  }
}

TEST_CASE("dirichlet restriction to an opposite pair") {
  // (w1, w3) / (w1 + w3) is Beta(1,1), independent of w1 + w3
  Rng rng(17);
  const std::vector<double> beta{1, 1, 1, 1};
  const int n = 100000;
  std::vector<double> r(n), s(n);
  for (int i = 0; i < n; ++i) {
    const auto x = sample_dirichlet(beta, rng);
    s[i] = x[0] + x[2];
    r[i] = x[0] / s[i];
  }
  const double mr = std::accumulate(r.begin(), r.end(), 0.0) / n;
  const double ms = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double cov = 0, vr = 0, vs = 0;
  for (int i = 0; i < n; ++i) {
    cov += (r[i] - mr) * (s[i] - ms);
    vr += (r[i] - mr) * (r[i] - mr);
    vs += (s[i] - ms) * (s[i] - ms);
  }
  CHECK(std::abs(mr - 0.5) < 0.01);
  CHECK(std::abs(cov / std::sqrt(vr * vs)) < 0.02);
}

TEST_CASE("nonballistic law") {
  Rng rng(5);
  const PhiLaw phi;
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_nonballistic(phi, rng);
    REQUIRE(s.is_elliptic());
    REQUIRE(s[0] + s[1] + s[2] + s[3] == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(s[0] / s[2] == doctest::Approx(2.0).epsilon(1e-12));
    REQUIRE(s[1] + s[3] == doctest::Approx(1 - 3 * s[2]).epsilon(1e-12));
  }

  const auto d = drift(nonballistic_distribution(0.1, true));
  CHECK(d[0] == doctest::Approx(0.1));
  CHECK(d[1] == doctest::Approx(-0.5));
  const auto d0 = drift(nonballistic_distribution(0.1, false));
  CHECK(d0[1] == doctest::Approx(0.5));
}

TEST_CASE("negative moments of phi") {
  // E[phi^-0.4] = 4^0.4 / 0.2 is finite; E[phi^-1/2] diverges like log n
  Rng rng(8);
  const PhiLaw phi;
  auto moment = [&](double p, int n) {
    double m = 0;
    for (int i = 0; i < n; ++i) m += std::pow(phi.sample(rng), -p) / n;
    return m;
  };
  const double finite = std::pow(4.0, 0.4) / 0.2;
  CHECK(moment(0.4, 1000000) == doctest::Approx(finite).epsilon(0.05));
  // sample means of an infinite-mean variable: compare medians over replications
  std::vector<double> small, big;
  for (int rep = 0; rep < 21; ++rep) {
    small.push_back(moment(0.5, 100));
    big.push_back(moment(0.5, 100000));
  }
  std::nth_element(small.begin(), small.begin() + 10, small.end());
  std::nth_element(big.begin(), big.begin() + 10, big.end());
  CHECK(big[10] > small[10] + 5.0);
}

TEST_CASE("ratio laws") {
  Rng rng(9);
  const auto law = EnvironmentLaw::ratio(3.0, RatioLaw::DirichletBase{0.1, 0.9, {1, 1}});
  for (int i = 0; i < 10000; ++i) {
    const auto s = law.sample(rng);
    REQUIRE(s.is_elliptic());
    REQUIRE(s[0] == 3.0 * s[2]);
    const double m = s[0] + s[2];
    REQUIRE(m > 0.1 - 1e-12);
    REQUIRE(m < 0.9 + 1e-12);
    REQUIRE(drift(s)[0] > 0);
  }
  const auto fixed = ratio_distribution(3.0, 0.8, std::vector<double>{0.5, 0.5});
  CHECK(fixed[0] == doctest::Approx(0.6));
  CHECK(fixed[2] == doctest::Approx(0.2));
  CHECK(fixed[1] == doctest::Approx(0.1));

  const auto nb = EnvironmentLaw::ratio(2.0, RatioLaw::NonballisticBase{});
  for (int i = 0; i < 2000; ++i) {
    const auto s = nb.sample(rng);
    REQUIRE(s[0] == 2.0 * s[2]);
    // member of the nonballistic family: the transverse pair is {phi, 1 - 4 phi}
    const double phi = s[2];
    const double lo = std::min(s[1], s[3]), hi = std::max(s[1], s[3]);
    REQUIRE(lo == doctest::Approx(std::min(phi, 1 - 4 * phi)).epsilon(1e-9));
    REQUIRE(hi == doctest::Approx(std::max(phi, 1 - 4 * phi)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(EnvironmentLaw::ratio(1.0, RatioLaw::DirichletBase{0.1, 0.9, {1, 1}}), ParameterError);
}

TEST_CASE("drift of the uniform law vanishes") {
  const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
  CHECK(drift(SiteDistribution(p)).norm() == 0.0);
}

TEST_CASE("quenched environment determinism") {
  const auto law = EnvironmentLaw::dirichlet({1, 1, 1, 1});
  QuenchedEnvironment env(law, 77);
  const Site x{3, -4};
  const auto a = env.site(x);
  CHECK(env.site(x) == a);
  QuenchedEnvironment other(law, 78);
  CHECK_FALSE(other.site(Site{0, 0}) == env.site(Site{0, 0}));

  std::vector<Site> sites;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) sites.push_back(Site{i, j});
  std::vector<SiteDistribution> reference;
  {
    QuenchedEnvironment fresh(law, 123);
    for (const auto& s : sites) reference.push_back(fresh.site(s));
  }
  Rng rng(4);
  std::vector<std::size_t> order(sites.size());
  for (int trial = 0; trial < 100; ++trial) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    QuenchedEnvironment fresh(law, 123);
    for (auto i : order) REQUIRE(fresh.site(sites[i]) == reference[i]);
  }
  CHECK(env.cached_sites() == 2);

  QuenchedEnvironment big(law, 9);
  std::vector<double> mean(4, 0.0);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const auto s = big.site(Site{i, j});
      for (int k = 0; k < 4; ++k) mean[k] += s[k] / 1e4;
    }
  for (double m : mean) CHECK(std::abs(m - 0.25) < 0.02);
  CHECK(big.memory_bytes() > 0);
}
