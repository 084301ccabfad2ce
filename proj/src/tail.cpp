#include "rwre/tail.hpp"

#include "rwre/errors.hpp"
#include "rwre/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace rwre::regen {

std::string to_string(TailMethod m) { return m == TailMethod::hill ? "hill" : "loglog_regression"; }

TailMethod parse_tail_method(const std::string& s) {
  if (s == "hill") return TailMethod::hill;
  if (s == "loglog" || s == "loglog_regression") return TailMethod::loglog;
  throw ParameterError("unknown tail method '" + s + "'");
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw ParameterError("invalid geometric grid");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double r = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = lo * std::exp(r * i);
  g.back() = hi;
  return g;
}

std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const auto n = static_cast<double>(lx.size());
  if (lx.size() < 3) throw InsufficientDataError("log-log fit needs at least 3 positive points", 0);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw ParameterError("log-log fit needs distinct x values");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    rss += r * r;
  }
  return {slope, std::sqrt(rss / (n - 2.0) / sxx)};
}

namespace {

void check_samples(std::span<const double> samples, std::span<const bool> censored) {
  if (!censored.empty() && censored.size() != samples.size())
    throw DimensionError("censoring flags must match samples");
  if (samples.empty()) throw InsufficientDataError("no samples", 0);
  if (!censored.empty() && std::all_of(censored.begin(), censored.end(), [](bool c) { return c; }))
    throw InsufficientDataError("all " + std::to_string(samples.size()) + " samples are censored",
                                static_cast<long>(samples.size()));
  for (double s : samples)
    if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("tail samples must be positive and finite");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (*mn == *mx) throw ParameterError("all tail samples are equal");
}

long count_censored(std::span<const bool> censored) {
  return static_cast<long>(std::count(censored.begin(), censored.end(), true));
}

HillPoint hill_at(const std::vector<double>& desc, std::size_t k) {
  const double threshold = desc[k];
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(desc[i] / threshold);
  h /= static_cast<double>(k);
  if (!(h > 0.0)) throw ParameterError("Hill estimator degenerate: top order statistics are tied");
  const double alpha = 1.0 / h;
  return {k, alpha, alpha / std::sqrt(static_cast<double>(k))};
}

std::size_t default_k(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.6)));
}

}  // namespace

std::vector<HillPoint> hill_plot(std::span<const double> samples, std::span<const std::size_t> ks) {
  check_samples(samples, {});
  std::vector<double> desc(samples.begin(), samples.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());
  std::vector<HillPoint> out;
  for (auto k : ks) {
    if (k < 1 || k >= desc.size()) continue;
    out.push_back(hill_at(desc, k));
  }
  return out;
}

std::vector<SurvivalPoint> empirical_survival(std::span<const double> samples,
                                              std::span<const bool> censored,
                                              std::span<const double> grid) {
  if (!censored.empty() && censored.size() != samples.size())
    throw DimensionError("censoring flags must match samples");
  std::vector<double> asc(samples.begin(), samples.end());
  std::sort(asc.begin(), asc.end());
  const auto n = static_cast<double>(asc.size());
  std::vector<SurvivalPoint> out;
  out.reserve(grid.size());
  for (double u : grid) {
    const auto above = static_cast<long>(asc.end() - std::upper_bound(asc.begin(), asc.end(), u));
    out.push_back({u, n > 0 ? static_cast<double>(above) / n : 0.0, above});
  }
  return out;
}

TailEstimate tail_exponent(std::span<const double> samples, std::span<const bool> censored,
                           TailMethod method, const TailOptions& opts) {
  check_samples(samples, censored);
  TailEstimate est;
  est.method = method;
  est.censored_count = count_censored(censored);
  est.n_samples = samples.size();
  const std::size_t n = samples.size();
  const std::size_t k = opts.k.value_or(default_k(n));

  std::vector<double> desc(samples.begin(), samples.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());

  if (method == TailMethod::hill) {
    const std::size_t uncensored = n - static_cast<std::size_t>(est.censored_count);
    if (uncensored < kMinHillSamples)
      throw InsufficientDataError("Hill estimator needs at least " + std::to_string(kMinHillSamples) +
                                      " uncensored samples, got " + std::to_string(uncensored),
                                  est.censored_count);
    if (k < 1 || k >= n) throw ParameterError("Hill k must lie in [1, N)");
    const HillPoint h = hill_at(desc, k);
    est.exponent = h.exponent;
    est.standard_error = h.standard_error;
    est.k = k;
    est.k_fraction = static_cast<double>(k) / static_cast<double>(n);
    est.light_tail_suspected = h.exponent > 10.0;
    if (k / 4 >= 10) {
      const HillPoint q = hill_at(desc, k / 4);
      if (q.exponent - h.exponent > 2.0 * q.standard_error) est.light_tail_suspected = true;
    }
    return est;
  }

  // Log-log regression of the empirical survival.
  std::vector<double> grid = opts.grid;
  double censor_floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < censored.size(); ++i)
    if (censored[i]) censor_floor = std::min(censor_floor, samples[i]);
  if (grid.empty()) {
    const auto risk = static_cast<std::size_t>(std::max<long>(opts.min_at_risk, 1));
    if (k >= n || risk >= n) throw InsufficientDataError("too few samples for the default grid", est.censored_count);
    const double lo = desc[k];
    double hi = desc[risk];
    if (hi >= censor_floor) hi = std::nextafter(censor_floor, 0.0);
    if (!(hi > lo))
      throw InsufficientDataError("no usable survival range below the censoring horizon",
                                  est.censored_count);
    grid = geometric_grid(lo, hi, opts.grid_points);
  } else {
    std::erase_if(grid, [&](double u) { return !(u > 0.0) || u >= censor_floor; });
  }
  const auto surv = empirical_survival(samples, censored, grid);
  std::vector<double> gu, gs;
  for (const auto& p : surv) {
    if (p.at_risk > 0) {
      gu.push_back(p.u);
      gs.push_back(p.survival);
    }
  }
  if (gu.size() < 3)
    throw InsufficientDataError("log-log regression needs at least 3 grid points with data",
                                est.censored_count);
  const auto [slope, resid_se] = loglog_fit(gu, gs);
  (void)resid_se;

  // Delta-method standard error: Cov(log S^(a), log S^(b)) = (1 - S(a)) / (N S(a))
  // for a <= b, propagated through the least-squares weights.
  const std::size_t m = gu.size();
  std::vector<double> lx(m);
  for (std::size_t i = 0; i < m; ++i) lx[i] = std::log(gu[i]);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0;
  for (double v : lx) sxx += (v - mx) * (v - mx);
  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t lo = gu[i] <= gu[j] ? i : j;
      const double c = (1.0 - gs[lo]) / (static_cast<double>(n) * gs[lo]);
      var += (lx[i] - mx) * (lx[j] - mx) * c;
    }
  }
  est.exponent = -slope;
  est.standard_error = std::sqrt(std::max(var, 0.0)) / sxx;
  est.grid = gu;
  est.light_tail_suspected = est.exponent > 10.0;
  return est;
}

double log_two_site_survival(double log_p, double log_q, std::int64_t n) {
  if (n < 0) throw ParameterError("survival index must be nonnegative");
  const auto a = static_cast<double>((n + 1) / 2);
  const auto b = static_cast<double>(n / 2);
  return a * log_p + b * log_q;
}

namespace {

// log p for p = omega(e) using the complementary mass, accurate near 1.
double log_prob(const env::SiteDistribution& s, int slot) {
  double rest = 0.0;
  for (int k = 0; k < s.size(); ++k)
    if (k != slot) rest += s[k];
  return s[slot] > 0.5 ? std::log1p(-rest) : std::log(s[slot]);
}

double log_mean_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

}  // namespace

TrapTailResult trap_exit_tail(const env::EnvironmentLaw& law, int e0_slot,
                              std::span<const double> n_grid, std::size_t draws,
                              std::uint64_t seed, unsigned threads, TrapPairing pairing) {
  const int d = law.dim();
  if (e0_slot < 0 || e0_slot >= 2 * d) throw ParameterError("trap direction slot out of range");
  if (draws < 1) throw ParameterError("trap tail needs at least one environment draw");
  if (n_grid.size() < 3) throw ParameterError("trap tail needs at least 3 grid points");
  const int back = lattice::opposite_slot(d, e0_slot);

  std::vector<double> log_p(draws), log_q(draws);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng(domain_seed(seed, SeedDomain::sampler, static_cast<std::int64_t>(c)));
    const std::size_t end = std::min(draws, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      log_p[i] = log_prob(law.sample(rng), e0_slot);
      log_q[i] = log_prob(law.sample(rng), back);
    }
  });

  TrapTailResult res;
  res.n_grid.assign(n_grid.begin(), n_grid.end());
  res.draws = draws;
  res.pairing = pairing;
  std::vector<double> buf(draws);
  for (double nd : n_grid) {
    const auto n = static_cast<std::int64_t>(std::llround(nd));
    double log_s;
    if (pairing == TrapPairing::factorized) {
      const auto a = static_cast<double>((n + 1) / 2);
      const auto b = static_cast<double>(n / 2);
      for (std::size_t i = 0; i < draws; ++i) buf[i] = a * log_p[i];
      log_s = log_mean_exp(buf);
      for (std::size_t i = 0; i < draws; ++i) buf[i] = b * log_q[i];
      log_s += b > 0 ? log_mean_exp(buf) : 0.0;
    } else {
      for (std::size_t i = 0; i < draws; ++i) buf[i] = log_two_site_survival(log_p[i], log_q[i], n);
      log_s = log_mean_exp(buf);
    }
    res.survival.push_back(std::exp(log_s));
  }
  const auto [slope, se] = loglog_fit(res.n_grid, res.survival);
  res.estimate.method = TailMethod::loglog;
  res.estimate.exponent = -slope;
  res.estimate.standard_error = se;
  res.estimate.grid = res.n_grid;
  res.estimate.n_samples = draws;
  return res;
}

}  // namespace rwre::regen
