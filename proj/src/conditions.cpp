#include "rwre/conditions.hpp"

#include "rwre/errors.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/tail.hpp"
#include "rwre/walker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rwre::cond {

namespace {

void check_weights(std::span<const double> w) {
  if (w.size() % 2 != 0) throw DimensionError("weights need 2d entries");
  lattice::require_dimension(static_cast<int>(w.size() / 2));
  for (double a : w)
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("weights must be positive and finite");
}

}  // namespace

void EllipticityWeights::validate() const { check_weights(alpha); }

double kappa(std::span<const double> alpha) {
  check_weights(alpha);
  // Summing sorted pair totals makes the result exactly invariant under
  // relabeling e_i <-> -e_i and permuting axes.
  const std::size_t d = alpha.size() / 2;
  std::vector<double> pairs(d);
  for (std::size_t i = 0; i < d; ++i) pairs[i] = alpha[i] + alpha[i + d];
  std::sort(pairs.begin(), pairs.end());
  double sum = 0.0;
  for (double p : pairs) sum += p;
  return 2.0 * sum - pairs.back();
}

double dirichlet_kappa(std::span<const double> beta) { return kappa(beta); }

bool satisfies_E_prime(std::span<const double> alpha, double t) { return kappa(alpha) > t; }

bool check_kalikow_region(std::span<const double> beta) {
  check_weights(beta);
  const std::size_t d = beta.size() / 2;
  double m = 0.0;
  for (std::size_t i = 0; i < d; ++i) m = std::max(m, std::abs(beta[i] - beta[i + d]));
  return m > 1.0;
}

RegionVerdict check_small_weight_region(std::span<const double> beta, double epsilon, int axis) {
  check_weights(beta);
  const int d = static_cast<int>(beta.size() / 2);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0,1)");
  if (axis < 0 || axis >= d) throw ParameterError("axis out of range");
  RegionVerdict v;
  v.epsilon = epsilon;
  v.axis = axis;
  v.weight = beta[axis + d];
  v.in_region = v.weight <= epsilon;
  v.caveat = "in region for the supplied epsilon; the admissible epsilon depends on the other parameters "
             "and is not known in closed form";
  return v;
}

std::vector<int> half_space_slots(const Eigen::VectorXd& v_hat) {
  const int d = static_cast<int>(v_hat.size());
  lattice::require_dimension(d);
  std::vector<int> out;
  for (int k = 0; k < 2 * d; ++k)
    if ((k < d ? v_hat[k] : -v_hat[k - d]) >= 0.0) out.push_back(k);
  return out;
}

bool check_E_prime_toward_direction(std::span<const double> alpha, const Eigen::VectorXd& v_hat) {
  check_weights(alpha);
  if (static_cast<std::size_t>(v_hat.size()) * 2 != alpha.size()) throw DimensionError("v_hat dimension mismatch");
  const auto in = half_space_slots(v_hat);
  const double a1 = alpha[in.front()];
  for (int k : in)
    if (alpha[k] != a1) return false;
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (alpha[k] > a1) return false;
  return true;
}

Interval wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0 || k < 0 || k > n) throw ParameterError("wilson interval needs 0 <= k <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict compare_to_threshold(const Interval& ci, double threshold) {
  if (ci.hi < threshold) return Verdict::pass;
  if (ci.lo > threshold) return Verdict::fail;
  return Verdict::inconclusive;
}

double default_L_tilde(double L, double cap) { return std::min(70.0 * L * L * L, cap); }

PMReport estimate_pm(const EnvironmentLaw& law, const PMOptions& opts) {
  const int d = law.dim();
  if (!(opts.L >= 2.0)) throw ParameterError("(P)_M boxes need L >= 2");
  if (opts.n_walks < 100) throw ParameterError("(P)_M estimate needs at least 100 walks");
  if (opts.l.size() != d) throw DimensionError("direction l has the wrong dimension");
  PMReport rep;
  rep.l = opts.l.normalized();
  rep.L = opts.L;
  rep.L_tilde = opts.L_tilde.value_or(default_L_tilde(opts.L, opts.L_tilde_cap));
  rep.M = opts.M;
  rep.n_walks = opts.n_walks;
  const lattice::BoxSpec box(rep.l, rep.L, rep.L_tilde);
  const Site origin(d);
  const walk::Region inside = [&box](const Site& x) { return box.contains(x); };

  std::vector<std::uint8_t> outcome(static_cast<std::size_t>(opts.n_walks));  // 0 front, 1 other, 2 censored
  parallel_for(outcome.size(), opts.threads, [&](std::size_t i) {
    const env::QuenchedEnvironment omega(law, hash_words(opts.seed, {static_cast<std::int64_t>(i)}));
    Rng rng = walk::walker_rng(opts.seed, i);
    const auto run = walk::run_until_exit(omega, origin, inside, opts.horizon, rng);
    if (run.censored()) outcome[i] = 2;
    else outcome[i] = box.classify_exit(*run.exit_site) == lattice::ExitSide::front ? 0 : 1;
  });
  for (auto o : outcome) {
    if (o != 0) ++rep.non_front;
    if (o == 2) ++rep.censored;
  }
  rep.p_hat = static_cast<double>(rep.non_front) / static_cast<double>(rep.n_walks);
  rep.ci = wilson_interval(rep.non_front, rep.n_walks);
  rep.threshold = std::pow(rep.L, -rep.M);
  rep.verdict = compare_to_threshold(rep.ci, rep.threshold);

  if (opts.exact_environments > 0) {
    const auto sites = box.sites();
    if (sites.size() <= opts.solver_cap) {
      std::vector<double> vals(static_cast<std::size_t>(opts.exact_environments));
      parallel_for(vals.size(), opts.threads, [&](std::size_t j) {
        const env::QuenchedEnvironment omega(law, hash_words(opts.seed, {static_cast<std::int64_t>(j)}));
        const auto dist = walk::exact_exit_distribution(omega, sites, origin, opts.solver_cap);
        double p = 0.0;
        for (std::size_t k = 0; k < dist.sites.size(); ++k)
          if (box.classify_exit(dist.sites[k]) != lattice::ExitSide::front) p += dist.probs[k];
        vals[j] = std::clamp(p, 0.0, 1.0);
      });
      double mean = 0.0, sq = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      for (double v : vals) sq += (v - mean) * (v - mean);
      rep.exact_annealed = mean;
      rep.exact_environments = opts.exact_environments;
      rep.exact_standard_error =
          vals.size() > 1 ? std::sqrt(sq / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size())) : 0.0;
    }
  }
  return rep;
}

double aqee_exponent(int d, double beta0, double beta, double zeta) {
  lattice::require_dimension(d);
  if (!(beta0 > 0.5 && beta0 < 1.0)) throw ParameterError("beta0 must lie in (1/2, 1)");
  if (!(beta > (beta0 + 1.0) / 2.0 && beta < 1.0)) throw ParameterError("beta must lie in ((beta0+1)/2, 1)");
  if (!(zeta > 0.0 && zeta < beta0)) throw ParameterError("zeta must lie in (0, beta0)");
  return std::min(beta + zeta, 3.0 * beta - 2.0 + (d - 1) * (beta - beta0));
}

double c0_log10(int d, double log_eta) {
  const double dd = d;
  return std::log10(2.0 / 3.0) + (120.0 * dd * dd * dd * dd + 3000.0 * dd * log_eta * log_eta) * std::log10(3.0);
}

double dirichlet_negative_moment(std::span<const double> beta, int slot, double alpha) {
  check_weights(beta);
  if (slot < 0 || static_cast<std::size_t>(slot) >= beta.size()) throw ParameterError("slot out of range");
  if (alpha == 0.0) return 1.0;
  const double b = beta[slot];
  if (!(alpha < b)) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (double x : beta) s += x;
  return std::exp(std::lgamma(b - alpha) + std::lgamma(s) - std::lgamma(b) - std::lgamma(s - alpha));
}

EtaEstimate eta_alpha_estimate(const EnvironmentLaw& law, double alpha, std::span<const int> slots,
                               std::int64_t n_samples, std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw ParameterError("alpha must be nonnegative");
  if (slots.empty()) throw ParameterError("no directions requested");
  if (n_samples < 2) throw ParameterError("eta estimate needs samples");
  EtaEstimate est;
  est.alpha = alpha;
  est.slots.assign(slots.begin(), slots.end());
  est.n_samples = n_samples;
  const std::size_t m = slots.size();
  std::vector<std::vector<double>> terms(m, std::vector<double>(static_cast<std::size_t>(n_samples)));
  Rng rng(domain_seed(seed, SeedDomain::sampler, 0x657461));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const auto w = law.sample(rng);
    for (std::size_t j = 0; j < m; ++j) terms[j][i] = alpha == 0.0 ? 1.0 : std::pow(w[slots[j]], -alpha);
  }
  const auto half = static_cast<std::size_t>(n_samples / 2);
  est.per_slot.resize(m);
  est.value = -1.0;
  est.half_sample_value = -1.0;
  std::size_t best = 0;
  for (std::size_t j = 0; j < m; ++j) {
    double full = 0.0, first = 0.0;
    for (std::size_t i = 0; i < terms[j].size(); ++i) {
      full += terms[j][i];
      if (i < half) first += terms[j][i];
    }
    est.per_slot[j] = full / static_cast<double>(n_samples);
    est.half_sample_value = std::max(est.half_sample_value, first / static_cast<double>(half));
    if (est.per_slot[j] > est.value) {
      est.value = est.per_slot[j];
      best = j;
    }
  }
  est.argmax_slot = slots[best];
  if (alpha == 0.0) return est;

  bool heavy = false;
  if (n_samples >= static_cast<std::int64_t>(regen::kMinHillSamples)) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto t = regen::tail_exponent(terms[j], {}, regen::TailMethod::hill);
      if (j == best) est.tail_index = t.exponent;
      if (t.exponent < 1.0) heavy = true;
    }
  }
  const bool drift = std::abs(est.value - est.half_sample_value) > 0.1 * est.half_sample_value;
  est.divergence_suspected = heavy || drift;
  return est;
}

Eigen::VectorXd estimate_direction(const EnvironmentLaw& law, std::int64_t n_walks, std::int64_t horizon,
                                   std::uint64_t seed, unsigned threads) {
  const int d = law.dim();
  if (n_walks < 1 || horizon < 1) throw ParameterError("direction estimate needs walks and a horizon");
  std::vector<Eigen::VectorXd> ends(static_cast<std::size_t>(n_walks));
  parallel_for(ends.size(), threads, [&](std::size_t i) {
    const env::QuenchedEnvironment omega(law, hash_words(seed, {static_cast<std::int64_t>(i)}));
    Rng rng = walk::walker_rng(seed, i);
    ends[i] = walk::walk(omega, Site(d), horizon, rng).end().to_vector();
  });
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& e : ends) mean += e;
  if (mean.norm() == 0.0) throw NumericError("mean displacement is zero; no direction");
  return mean.normalized();
}

HypothesisReport hypothesis_report(std::span<const double> beta, const HypothesisOptions& opts) {
  check_weights(beta);
  const int d = static_cast<int>(beta.size() / 2);
  HypothesisReport rep;
  rep.weights.assign(beta.begin(), beta.end());
  rep.kappa_value = kappa(beta);
  rep.lln = rep.kappa_value > 1.0;
  rep.annealed_clt = rep.kappa_value > 2.0;
  rep.quenched_clt = rep.kappa_value > 176.0 * d;
  rep.E_prime_levels = {{"(E')_1", 1.0, rep.lln},
                        {"(E')_2", 2.0, rep.annealed_clt},
                        {"(E')_" + std::to_string(176 * d), 176.0 * d, rep.quenched_clt}};
  rep.kalikow = check_kalikow_region(beta);
  if (opts.epsilon) rep.small_weight = check_small_weight_region(beta, *opts.epsilon, opts.small_weight_axis);
  if (opts.v_hat) rep.E_prime_toward_v_hat = check_E_prime_toward_direction(beta, *opts.v_hat);

  rep.alpha_bar = *std::min_element(beta.begin(), beta.end());
  double eta = 0.0;
  for (int k = 0; k < 2 * d; ++k) eta = std::max(eta, dirichlet_negative_moment(beta, k, rep.alpha_bar / 2));
  rep.eta_half_alpha_bar = eta;
  rep.c0_log10 = c0_log10(d, std::log(eta));

  if (opts.law && opts.eta_samples > 0) {
    std::vector<int> all(static_cast<std::size_t>(2 * d));
    for (int k = 0; k < 2 * d; ++k) all[k] = k;
    rep.eta_all = eta_alpha_estimate(*opts.law, rep.alpha_bar / 2, all, opts.eta_samples, opts.seed);
    if (opts.v_hat)
      rep.eta_half_space = eta_alpha_estimate(*opts.law, rep.alpha_bar / 2, half_space_slots(*opts.v_hat),
                                              opts.eta_samples, opts.seed);
  }
  rep.notes.push_back("c0-scale boxes (log10 c0 = " + std::to_string(rep.c0_log10) +
                      ") are out of reach; (P)_M checks are desk-scale diagnostics only");
  if (!opts.v_hat)
    rep.notes.push_back("asymptotic direction not supplied; half-space variants skipped");
  return rep;
}

}  // namespace rwre::cond
