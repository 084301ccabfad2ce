// rwre: command-line front end. Every command reads one JSON config, writes
// its CSV/JSON outputs plus config.resolved.json and schema.json into --out.

#include "rwre/conditions.hpp"
#include "rwre/config.hpp"
#include "rwre/errors.hpp"
#include "rwre/flows/box_flow.hpp"
#include "rwre/flows/decomposition.hpp"
#include "rwre/flows/selftest.hpp"
#include "rwre/io.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/tail.hpp"
#include "rwre/walker.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace rwre;
using io::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInsufficient = 3, kCertificate = 4 };

struct CertificateFailure : Error {
  using Error::Error;
};

struct Context {
  config::ExperimentConfig cfg;
  fs::path out;
  json schema = json::object();

  std::ofstream open(const std::string& name) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (out / name).string());
    return f;
  }

  void write_json(const std::string& name, const json& j) {
    auto f = open(name);
    f << j.dump(2) << "\n";
  }

  void describe(const std::string& file, std::vector<std::pair<std::string, std::string>> columns) {
    json cols = json::array();
    for (auto& [name, what] : columns) cols.push_back({{"name", name}, {"description", what}});
    schema[file] = cols;
  }

  const env::EnvironmentLaw& law() const {
    if (!cfg.law) throw ConfigError("'law': this command needs an environment law");
    return *cfg.law;
  }
};

std::vector<std::string> slot_names(int d) {
  std::vector<std::string> out;
  for (const auto& dir : lattice::canonical_directions(d)) out.push_back(dir.name());
  return out;
}

// ---------------------------------------------------------------------------

int cmd_env_sample(Context& ctx) {
  const auto& law = ctx.law();
  const int d = law.dim();
  const auto names = slot_names(d);
  const auto n = ctx.cfg.env_sample.n;
  Rng rng(domain_seed(ctx.cfg.seed, SeedDomain::sampler, 1));

  std::vector<std::string> header{"id"};
  std::vector<std::pair<std::string, std::string>> cols{{"id", "sample index"}};
  for (const auto& s : names) {
    header.push_back("omega_" + s);
    cols.emplace_back("omega_" + s, "transition probability toward " + s);
  }
  ctx.describe("samples.csv", cols);
  auto file = ctx.open("samples.csv");
  io::CsvWriter csv(file, header);

  std::vector<double> mean(2 * d, 0.0), sq(2 * d, 0.0);
  double ratio_dev = 0.0;
  const bool is_nonballistic = std::holds_alternative<env::NonballisticLaw>(law.variant());
  for (std::int64_t i = 0; i < n; ++i) {
    const auto w = law.sample(rng);
    for (int k = 0; k < 2 * d; ++k) {
      mean[k] += w[k];
      sq[k] += w[k] * w[k];
    }
    if (is_nonballistic) ratio_dev = std::max(ratio_dev, std::abs(w[0] - 2.0 * w[d]) / w[d]);
    if (i < ctx.cfg.env_sample.csv_rows) {
      csv << i;
      for (int k = 0; k < 2 * d; ++k) csv << w[k];
      csv.end_row();
    }
  }
  json summary;
  summary["law"] = ctx.cfg.law_spec;
  summary["n"] = n;
  json m = json::object(), var = json::object();
  for (int k = 0; k < 2 * d; ++k) {
    mean[k] /= static_cast<double>(n);
    m[names[k]] = mean[k];
    var[names[k]] = sq[k] / static_cast<double>(n) - mean[k] * mean[k];
  }
  summary["mean"] = m;
  summary["variance"] = var;
  if (const auto* dl = std::get_if<env::DirichletLaw>(&law.variant())) {
    double s = 0.0, worst = 0.0;
    for (double b : dl->beta) s += b;
    json expect = json::object();
    for (int k = 0; k < 2 * d; ++k) {
      expect[names[k]] = dl->beta[k] / s;
      worst = std::max(worst, std::abs(mean[k] - dl->beta[k] / s));
    }
    summary["expected_mean"] = expect;
    summary["max_abs_mean_error"] = worst;
  }
  if (is_nonballistic) summary["max_relative_deviation_e1_vs_2_minus_e1"] = ratio_dev;
  ctx.write_json("summary.json", summary);
  std::cout << "env-sample: " << n << " draws, summary.json written\n";
  return kOk;
}

int cmd_pm_check(Context& ctx) {
  const auto& law = ctx.law();
  const auto& pm = ctx.cfg.pm;
  ctx.describe("pm_sweep.csv",
               {{"L", "box half-length along l"},
                {"L_tilde", "box half-width transverse to l"},
                {"M", "exponent of the threshold L^-M"},
                {"n_walks", "annealed walks"},
                {"non_front", "walks not leaving through the front side (censored included)"},
                {"censored", "walks stopped at the horizon"},
                {"p_hat", "non-front exit frequency"},
                {"ci_lo", "Wilson 95% lower bound"},
                {"ci_hi", "Wilson 95% upper bound"},
                {"threshold", "L^-M"},
                {"verdict", "pass, fail or inconclusive"},
                {"exact_annealed", "mean exact non-front probability over sampled environments (empty if skipped)"},
                {"exact_se", "standard error of exact_annealed"}});
  auto file = ctx.open("pm_sweep.csv");
  io::CsvWriter csv(file, {"L", "L_tilde", "M", "n_walks", "non_front", "censored", "p_hat", "ci_lo", "ci_hi",
                           "threshold", "verdict", "exact_annealed", "exact_se"});
  json reports = json::array();
  std::vector<double> p_by_L;
  for (std::size_t i = 0; i < pm.L.size(); ++i) {
    cond::PMOptions o;
    o.l = pm.direction;
    o.L = pm.L[i];
    if (!pm.L_tilde.empty()) o.L_tilde = pm.L_tilde[i];
    o.L_tilde_cap = pm.L_tilde_cap;
    o.M = pm.M.front();
    o.n_walks = pm.n_walks;
    o.horizon = pm.horizon;
    o.seed = hash_words(ctx.cfg.seed, {static_cast<std::int64_t>(i)});
    o.threads = ctx.cfg.threads;
    o.exact_environments = pm.exact_environments;
    o.solver_cap = static_cast<std::size_t>(pm.solver_cap);
    auto rep = cond::estimate_pm(law, o);
    p_by_L.push_back(rep.estimate());
    for (double M : pm.M) {
      rep.M = M;
      rep.threshold = std::pow(rep.L, -M);
      rep.verdict = cond::compare_to_threshold(rep.ci, rep.threshold);
      csv << rep.L << rep.L_tilde << M << rep.n_walks << rep.non_front << rep.censored << rep.p_hat << rep.ci.lo
          << rep.ci.hi << rep.threshold << cond::to_string(rep.verdict)
          << (rep.exact_annealed ? io::format_number(*rep.exact_annealed) : std::string())
          << (rep.exact_annealed ? io::format_number(rep.exact_standard_error) : std::string());
      csv.end_row();
      reports.push_back(io::to_json(rep));
    }
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < p_by_L.size(); ++i)
    if (!(p_by_L[i] < p_by_L[i - 1])) decreasing = false;
  json j;
  j["law"] = ctx.cfg.law_spec;
  j["reports"] = reports;
  j["strictly_decreasing_in_L"] = decreasing;
  j["c0_log10_lower_bound"] = cond::c0_log10(law.dim(), 0.0);
  j["note"] = "boxes of the size c0 required by the asymptotic condition are out of reach (log10 c0 >= " +
              io::format_number(std::round(cond::c0_log10(law.dim(), 0.0) * 10) / 10) +
              "); these are desk-scale diagnostics and the trend over L is the observable";
  ctx.write_json("pm_report.json", j);
  std::cout << "pm-check: " << pm.L.size() << " box sizes, strictly decreasing in L: "
            << (decreasing ? "yes" : "no") << "\n";
  return kOk;
}

struct Battery {
  std::vector<regen::RegenerationRecord> records;
  std::vector<double> direct_velocity;  // X_n . l / n
  std::vector<std::size_t> cache_bytes;  // environment cache per walk
};

Battery run_battery(const Context& ctx) {
  const auto& law = ctx.law();
  const auto& rc = ctx.cfg.regen;
  const Eigen::VectorXd l = rc.direction.normalized();
  const auto cfg = regen::RegenConfig::make(l, rc.horizon, rc.a, rc.confirmation_depth);
  Battery b;
  b.cache_bytes.resize(static_cast<std::size_t>(rc.n_walks));
  b.records.resize(static_cast<std::size_t>(rc.n_walks));
  b.direct_velocity.resize(b.records.size());
  parallel_for(b.records.size(), ctx.cfg.threads, [&](std::size_t i) {
    const env::QuenchedEnvironment omega(law, hash_words(ctx.cfg.seed, {static_cast<std::int64_t>(i)}));
    Rng rng = walk::walker_rng(ctx.cfg.seed, i);
    b.records[i] = regen::find_regenerations(omega, lattice::Site(law.dim()), cfg, rng);
    b.direct_velocity[i] = b.records[i].end.dot(l) / static_cast<double>(rc.horizon);
    b.cache_bytes[i] = omega.memory_bytes();
  });
  return b;
}

int cmd_regen(Context& ctx) {
  const auto b = run_battery(ctx);
  const int d = ctx.law().dim();
  std::vector<std::pair<std::string, std::string>> cols{{"walk", "walk index"},
                                                        {"k", "gap index (k >= 1; tau_1 excluded)"},
                                                        {"tau", "regeneration time starting the gap"},
                                                        {"gap", "tau_{k+1} - tau_k"}};
  std::vector<std::string> header{"walk", "k", "tau", "gap"};
  for (int j = 0; j < d; ++j) {
    header.push_back("dx" + std::to_string(j + 1));
    cols.emplace_back("dx" + std::to_string(j + 1), "displacement over the gap, coordinate " + std::to_string(j + 1));
  }
  ctx.describe("regen_gaps.csv", cols);
  auto file = ctx.open("regen_gaps.csv");
  io::CsvWriter csv(file, header);
  for (std::size_t w = 0; w < b.records.size(); ++w) {
    const auto& r = b.records[w];
    const auto gaps = r.gaps();
    const auto dx = r.displacement_gaps();
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      csv << w << k + 1 << r.times[k] << gaps[k];
      for (int j = 0; j < d; ++j) csv << dx[k][j];
      csv.end_row();
    }
  }
  const auto stats = regen::renewal_statistics(b.records);
  double mean = 0.0, sq = 0.0;
  for (double v : b.direct_velocity) mean += v;
  mean /= static_cast<double>(b.direct_velocity.size());
  for (double v : b.direct_velocity) sq += (v - mean) * (v - mean);
  const double se = b.direct_velocity.size() > 1
                        ? std::sqrt(sq / static_cast<double>(b.direct_velocity.size() - 1) /
                                    static_cast<double>(b.direct_velocity.size()))
                        : 0.0;
  const Eigen::VectorXd l = ctx.cfg.regen.direction.normalized();
  json j;
  j["law"] = ctx.cfg.law_spec;
  j["renewal"] = io::to_json(stats);
  j["renewal_velocity_along_l"] = stats.velocity.dot(l);
  j["direct_velocity_along_l"] = {{"mean", mean}, {"standard_error", se}, {"n", b.direct_velocity.size()}};
  std::size_t total = 0;
  for (const auto& r : b.records) total += r.times.size();
  j["regenerations_found"] = total;
  j["max_environment_cache_bytes"] = *std::max_element(b.cache_bytes.begin(), b.cache_bytes.end());
  ctx.write_json("regen.json", j);
  std::cout << "regen: " << stats.n_gaps << " gaps, velocity along l " << io::format_number(stats.velocity.dot(l))
            << " (direct " << io::format_number(mean) << ")\n";
  return kOk;
}

int cmd_tail(Context& ctx) {
  const auto& tc = ctx.cfg.tail;
  std::vector<double> samples;
  std::vector<bool> censored_flags;
  if (tc.source == "pareto") {
    Rng rng(domain_seed(ctx.cfg.seed, SeedDomain::synthetic, 2));
    for (std::int64_t i = 0; i < tc.pareto_n; ++i) samples.push_back(std::pow(rng.uniform_open(), -1.0 / tc.pareto_alpha));
    censored_flags.assign(samples.size(), false);
  } else {
    const auto b = run_battery(ctx);
    for (const auto& r : b.records) {
      for (auto g : r.gaps()) {
        samples.push_back(static_cast<double>(g));
        censored_flags.push_back(false);
      }
      const std::int64_t last = r.times.empty() ? 0 : r.times.back();
      if (r.censored_tail && r.horizon > last) {
        samples.push_back(static_cast<double>(r.horizon - last));
        censored_flags.push_back(true);
      }
    }
  }
  std::unique_ptr<bool[]> flags(new bool[censored_flags.size()]);
  for (std::size_t i = 0; i < censored_flags.size(); ++i) flags[i] = censored_flags[i];
  const std::span<const bool> cflags(flags.get(), censored_flags.size());
  long n_censored = 0;
  for (bool c : censored_flags) n_censored += c;

  regen::TailOptions opts;
  if (tc.k) opts.k = static_cast<std::size_t>(*tc.k);
  opts.grid = tc.grid;
  opts.grid_points = tc.grid_points;
  opts.min_at_risk = tc.min_at_risk;
  regen::TailEstimate est;
  try {
    est = regen::tail_exponent(samples, cflags, regen::parse_tail_method(tc.method), opts);
  } catch (const InsufficientDataError& e) {
    throw InsufficientDataError(std::string(e.what()) + " (censored samples: " + std::to_string(n_censored) + ")",
                                n_censored);
  }

  std::vector<double> grid = est.grid;
  if (grid.empty()) {
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    grid = regen::geometric_grid(sorted.front() > 0 ? sorted.front() : 1.0, sorted.back(), tc.grid_points);
  }
  ctx.describe("survival.csv", {{"u", "threshold"},
                                {"survival", "empirical P(X > u), censored samples counted as exceeding u below their value"},
                                {"at_risk", "samples above u"}});
  auto file = ctx.open("survival.csv");
  io::CsvWriter csv(file, {"u", "survival", "at_risk"});
  for (const auto& p : regen::empirical_survival(samples, cflags, grid)) {
    csv << p.u << p.survival << static_cast<std::int64_t>(p.at_risk);
    csv.end_row();
  }
  std::vector<double> uncensored;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!censored_flags[i]) uncensored.push_back(samples[i]);
  std::vector<std::size_t> ks;
  for (double k = 10; k < static_cast<double>(uncensored.size()) / 2; k *= 1.25) {
    const auto kk = static_cast<std::size_t>(k);
    if (ks.empty() || ks.back() != kk) ks.push_back(kk);
  }
  ctx.describe("hill_plot.csv", {{"k", "number of top order statistics"},
                                 {"exponent", "Hill estimate at k (uncensored samples)"},
                                 {"standard_error", "exponent / sqrt(k)"}});
  auto hill_file = ctx.open("hill_plot.csv");
  io::CsvWriter hill_csv(hill_file, {"k", "exponent", "standard_error"});
  if (uncensored.size() > 20)
    for (const auto& h : regen::hill_plot(uncensored, ks)) {
      hill_csv << h.k << h.exponent << h.standard_error;
      hill_csv.end_row();
    }

  json j;
  j["source"] = tc.source;
  if (tc.source == "pareto") j["pareto_alpha"] = tc.pareto_alpha;
  j["estimate"] = io::to_json(est);
  j["ci95"] = {est.exponent - 1.959963984540054 * est.standard_error,
               est.exponent + 1.959963984540054 * est.standard_error};
  ctx.write_json("tail.json", j);
  std::cout << "tail: " << regen::to_string(est.method) << " exponent " << io::format_number(est.exponent)
            << " +- " << io::format_number(est.standard_error) << "\n";
  return kOk;
}

int cmd_trap_tail(Context& ctx) {
  const auto& law = ctx.law();
  const auto& tc = ctx.cfg.trap;
  const auto grid = regen::geometric_grid(tc.n_min, tc.n_max, tc.grid_points);
  const auto res = regen::trap_exit_tail(law, tc.e0_slot, grid, static_cast<std::size_t>(tc.draws), ctx.cfg.seed,
                                         ctx.cfg.threads,
                                         tc.pairing == "paired" ? regen::TrapPairing::paired
                                                                : regen::TrapPairing::factorized);
  ctx.describe("trap_survival.csv", {{"n", "time"}, {"survival", "annealed P(T_K > n) for K = {0, e0}"}});
  auto file = ctx.open("trap_survival.csv");
  io::CsvWriter csv(file, {"n", "survival"});
  for (std::size_t i = 0; i < res.n_grid.size(); ++i) {
    csv << res.n_grid[i] << res.survival[i];
    csv.end_row();
  }
  json j;
  j["law"] = ctx.cfg.law_spec;
  j["e0_slot"] = tc.e0_slot;
  j["draws"] = res.draws;
  j["pairing"] = tc.pairing;
  j["estimate"] = io::to_json(res.estimate);
  if (const auto* dl = std::get_if<env::DirichletLaw>(&law.variant())) {
    const int d = law.dim();
    double s = 0.0;
    for (double b : dl->beta) s += b;
    j["predicted_exponent"] = 2 * s - dl->beta[tc.e0_slot] - dl->beta[lattice::opposite_slot(d, tc.e0_slot)];
  }
  ctx.write_json("trap_tail.json", j);
  std::cout << "trap-tail: exponent " << io::format_number(res.estimate.exponent) << " +- "
            << io::format_number(res.estimate.standard_error) << "\n";
  return kOk;
}

flows::ThetaSpec theta_spec(const config::ExperimentConfig& cfg) {
  const auto& fc = cfg.flow;
  flows::ThetaSpec s;
  const int d = static_cast<int>(fc.source.size());
  s.source = lattice::Site(d);
  s.target = lattice::Site(d);
  for (int j = 0; j < d; ++j) {
    s.source[j] = fc.source[j];
    s.target[j] = fc.target[j];
  }
  s.slot = fc.slot;
  s.alpha = fc.alpha;
  s.R = fc.R.value_or(flows::BoxFlowSpec::default_radius(fc.alpha));
  return s;
}

json certificate_or_throw(Context& ctx, const flows::CertificateReport& rep, const std::string& file) {
  json j = io::to_json(rep);
  ctx.write_json(file, j);
  for (const auto& c : rep.checks)
    std::cout << "  " << (c.passed ? "pass " : "FAIL ") << c.name << (c.witness.empty() ? "" : " at " + c.witness)
              << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  if (!rep.all_passed()) {
    for (const auto& c : rep.checks)
      if (!c.passed) throw CertificateFailure("certificate check '" + c.name + "' failed" +
                                              (c.witness.empty() ? "" : " at " + c.witness));
  }
  return j;
}

int cmd_flow_build(Context& ctx) {
  const auto spec = theta_spec(ctx.cfg);
  const auto theta = flows::build_theta(spec);
  const auto dec = flows::path_decomposition(theta.flow, theta.source_vertex);
  json j = ctx.cfg.flow.exact ? io::flow_to_json(spec, theta.flow) : io::flow_to_json(spec, flows::to_double_flow(theta.flow));
  j["gamma"] = flows::to_string(theta.gamma);
  j["connectors"] = {{"count", theta.connectors.paths.size()},
                     {"K1", theta.connectors.K1},
                     {"K2", theta.connectors.K2},
                     {"max_length", theta.connectors.max_length}};
  j["decomposition"] = {{"paths", dec.paths.size()}, {"cycles_cancelled", dec.cycles_cancelled}};
  ctx.write_json("theta.json", j);
  std::cout << "flow-build: support " << theta.flow.support_size() << " edges, " << dec.paths.size()
            << " weighted paths\n";
  if (ctx.cfg.flow.exact)
    certificate_or_throw(ctx, flows::verify_flow_certificate(theta.flow, spec), "certificate.json");
  else
    certificate_or_throw(ctx, flows::verify_flow_certificate(flows::to_double_flow(theta.flow), spec),
                         "certificate.json");
  return kOk;
}

int cmd_flow_verify(Context& ctx, const std::string& flow_path, bool selftest) {
  if (selftest) {
    const auto r = flows::run_feasibility_selftest(ctx.cfg.flow.selftest_instances,
                                                   ctx.cfg.flow.selftest_max_vertices, ctx.cfg.seed);
    ctx.write_json("selftest.json", {{"instances", r.instances},
                                     {"agreements", r.agreements},
                                     {"feasible", r.feasible},
                                     {"flow_violations", r.flow_violations},
                                     {"bad_certificates", r.bad_certificates},
                                     {"passed", r.passed()}});
    std::cout << "flow-verify self-test: " << r.agreements << "/" << r.instances
              << " verdicts match the exhaustive cut check\n";
    if (!r.passed()) throw CertificateFailure("feasibility self-test disagreed with the cut oracle");
    if (flow_path.empty()) return kOk;
  }
  if (flow_path.empty()) throw ConfigError("flow-verify needs --flow FILE or --selftest");
  std::ifstream in(flow_path);
  if (!in) throw ConfigError("cannot open flow file '" + flow_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("flow file is not valid JSON: ") + e.what());
  }
  const auto loaded = io::flow_from_json(j);
  const auto rep = std::visit([&](const auto& f) { return flows::verify_flow_certificate(f, loaded.spec); },
                              loaded.flow);
  std::cout << "flow-verify: " << flow_path << "\n";
  certificate_or_throw(ctx, rep, "certificate.json");
  return kOk;
}

int cmd_report(Context& ctx) {
  std::vector<double> beta = ctx.cfg.report.beta;
  if (beta.empty()) {
    const auto* dl = ctx.cfg.law ? std::get_if<env::DirichletLaw>(&ctx.cfg.law->variant()) : nullptr;
    if (!dl) throw ConfigError("'report.beta': required unless the law is Dirichlet");
    beta = dl->beta;
  }
  cond::HypothesisOptions o;
  o.epsilon = ctx.cfg.report.epsilon;
  o.small_weight_axis = ctx.cfg.report.small_weight_axis;
  o.v_hat = ctx.cfg.report.v_hat;
  if (ctx.cfg.report.eta_samples > 0) {
    o.law = ctx.cfg.law ? *ctx.cfg.law : env::EnvironmentLaw::dirichlet(beta);
    o.eta_samples = ctx.cfg.report.eta_samples;
  }
  o.seed = ctx.cfg.seed;
  const auto rep = cond::hypothesis_report(beta, o);
  ctx.write_json("hypothesis.json", io::to_json(rep));
  std::cout << "report: kappa " << io::format_number(rep.kappa_value) << ", LLN " << rep.lln << ", annealed CLT "
            << rep.annealed_clt << ", quenched CLT " << rep.quenched_clt << ", kalikow " << rep.kalikow << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks in random environment: simulation and certificate checks"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir, flow_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool selftest = false;
  app.add_option("--config", config_path, "JSON experiment config")->envname("RWRE_CONFIG");
  app.add_option("--seed", seed, "master seed override")->envname("RWRE_SEED");
  app.add_option("--threads", threads, "worker threads")->envname("RWRE_THREADS");
  app.add_option("--out", out_dir, "output directory")->envname("RWRE_OUT");

  const std::map<std::string, std::string> commands{
      {"env-sample", "sample site distributions; CSV plus moment summary"},
      {"pm-check", "Monte Carlo non-front exit estimates over box sizes"},
      {"regen", "regeneration times and renewal velocity"},
      {"tail", "tail exponent of regeneration gaps or a Pareto self-test"},
      {"trap-tail", "exact two-site trap exit tail"},
      {"flow-build", "construct and certify a unit flow between merged pairs"},
      {"flow-verify", "audit a flow file, or run the feasibility self-test"},
      {"report", "ellipticity and ballisticity hypothesis report"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) subs[name] = app.add_subcommand(name, help);
  subs["flow-verify"]->add_option("--flow", flow_path, "flow JSON to audit")->envname("RWRE_FLOW");
  subs["flow-verify"]->add_flag("--selftest", selftest, "random small graphs against the exhaustive cut check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    Context ctx;
    ctx.cfg = config_path.empty() ? config::parse_config(json::object()) : config::load_config(config_path);
    if (seed) ctx.cfg.seed = *seed;
    if (threads) {
      if (*threads < 1) throw ConfigError("'threads': must be at least 1");
      ctx.cfg.threads = *threads;
    }
    if (!out_dir.empty()) ctx.cfg.out = out_dir;
    ctx.out = ctx.cfg.out;
    fs::create_directories(ctx.out);
    ctx.write_json("config.resolved.json", ctx.cfg.resolved());

    int rc = kOk;
    std::string name;
    for (const auto& [n, sub] : subs)
      if (sub->parsed()) name = n;
    try {
      if (name == "env-sample") rc = cmd_env_sample(ctx);
      else if (name == "pm-check") rc = cmd_pm_check(ctx);
      else if (name == "regen") rc = cmd_regen(ctx);
      else if (name == "tail") rc = cmd_tail(ctx);
      else if (name == "trap-tail") rc = cmd_trap_tail(ctx);
      else if (name == "flow-build") rc = cmd_flow_build(ctx);
      else if (name == "flow-verify") rc = cmd_flow_verify(ctx, flow_path, selftest);
      else if (name == "report") rc = cmd_report(ctx);
    } catch (...) {
      ctx.write_json("schema.json", ctx.schema);
      throw;
    }
    ctx.write_json("schema.json", ctx.schema);
    return rc;
  } catch (const CertificateFailure& e) {
    std::cerr << "certificate failure: " << e.what() << "\n";
    return kCertificate;
  } catch (const InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kInsufficient;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const GeometryError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
