#include "rwre/config.hpp"

#include "rwre/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rwre::config {

namespace {

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) out = convert<T>(*v, key_path(key));
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    if (const json* v = find(key)) out = convert<T>(*v, key_path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + key_path(it.key()) + "'");
  }

  template <class T>
  static T convert(const json& v, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, Eigen::VectorXd>) {
        const auto xs = v.get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("'" + path + "': expected a number");
        return v.get<double>();
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError("'" + path + "': expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned()) return v.get<T>();
          if (v.get<std::int64_t>() < 0) throw ConfigError("'" + path + "': expected a nonnegative integer");
        }
        return v.get<T>();
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError("'" + path + "': " + e.what());
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : "'" + path_ + "': "; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError("'" + path + "': " + what);
}

env::PhiLaw parse_phi(const json* j, const std::string& path) {
  env::PhiLaw phi;
  if (!j) return phi;
  Section s(*j, path);
  s.read("scale", phi.scale);
  s.read("power", phi.power);
  s.finish();
  return phi;
}

json phi_json(const env::PhiLaw& p) { return json{{"scale", p.scale}, {"power", p.power}}; }

}  // namespace

env::EnvironmentLaw parse_law(const json& spec, int dimension) {
  Section s(spec, "law");
  std::string type;
  s.read("type", type);
  try {
    if (type == "dirichlet") {
      std::vector<double> beta;
      s.read("beta", beta);
      require(!beta.empty(), "law.beta", "required for a Dirichlet law");
      s.finish();
      return env::EnvironmentLaw::dirichlet(beta);
    }
    if (type == "uniform") {
      int d = dimension;
      s.read("dim", d);
      s.finish();
      return env::EnvironmentLaw::uniform(d);
    }
    if (type == "constant") {
      std::vector<double> probs;
      s.read("probs", probs);
      s.finish();
      return env::EnvironmentLaw::constant(probs);
    }
    if (type == "nonballistic") {
      const auto phi = parse_phi(s.find("phi"), "law.phi");
      s.finish();
      return env::EnvironmentLaw::nonballistic(phi);
    }
    if (type == "ratio") {
      double r = 2.0;
      s.read("r", r);
      const json* base = s.find("base");
      require(base != nullptr, "law.base", "required for a ratio law");
      s.finish();
      Section b(*base, "law.base");
      std::string btype;
      b.read("type", btype);
      if (btype == "dirichlet") {
        env::RatioLaw::DirichletBase db;
        b.read("mass_lo", db.mass_lo);
        b.read("mass_hi", db.mass_hi);
        b.read("transverse_beta", db.transverse_beta);
        b.finish();
        return env::EnvironmentLaw::ratio(r, db);
      }
      if (btype == "nonballistic") {
        env::RatioLaw::NonballisticBase cb{parse_phi(b.find("phi"), "law.base.phi")};
        b.finish();
        return env::EnvironmentLaw::ratio(r, cb);
      }
      throw ConfigError("'law.base.type': expected dirichlet or nonballistic, got '" + btype + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("'law': ") + e.what());
  }
  throw ConfigError("'law.type': expected dirichlet, uniform, constant, nonballistic or ratio, got '" + type + "'");
}

namespace {

json law_json(const env::EnvironmentLaw& law) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, env::DirichletLaw>) return {{"type", "dirichlet"}, {"beta", v.beta}};
        else if constexpr (std::is_same_v<T, env::UniformLaw>) return {{"type", "uniform"}, {"dim", v.dim}};
        else if constexpr (std::is_same_v<T, env::ConstantLaw>) return {{"type", "constant"}, {"probs", v.probs}};
        else if constexpr (std::is_same_v<T, env::NonballisticLaw>) return {{"type", "nonballistic"}, {"phi", phi_json(v.phi)}};
        else {
          json base;
          if (const auto* db = std::get_if<env::RatioLaw::DirichletBase>(&v.base))
            base = {{"type", "dirichlet"}, {"mass_lo", db->mass_lo}, {"mass_hi", db->mass_hi},
                    {"transverse_beta", db->transverse_beta}};
          else
            base = {{"type", "nonballistic"}, {"phi", phi_json(std::get<env::RatioLaw::NonballisticBase>(v.base).phi)}};
          return {{"type", "ratio"}, {"r", v.r}, {"base", base}};
        }
      },
      law.variant());
}

Eigen::VectorXd unit(int d, int axis) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v[axis] = 1.0;
  return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void check_direction(const Eigen::VectorXd& v, int d, const std::string& path) {
  require(v.size() == d, path, "expected " + std::to_string(d) + " components");
  require(v.norm() > 0.0, path, "direction must be nonzero");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Section s(j, "");
  s.read("dimension", c.dimension);
  try {
    lattice::require_dimension(c.dimension);
  } catch (const Error& e) {
    throw ConfigError(std::string("'dimension': ") + e.what());
  }
  s.read("seed", c.seed);
  s.read("threads", c.threads);
  require(c.threads >= 1, "threads", "must be at least 1");
  s.read("out", c.out);

  if (const json* law = s.find("law")) {
    c.law = parse_law(*law, c.dimension);
    require(c.law->dim() == c.dimension, "law", "law dimension " + std::to_string(c.law->dim()) +
                                                    " does not match dimension " + std::to_string(c.dimension));
    c.law_spec = law_json(*c.law);
  }
  const int d = c.dimension;

  if (const json* v = s.find("env_sample")) {
    Section t(*v, "env_sample");
    t.read("n", c.env_sample.n);
    t.read("csv_rows", c.env_sample.csv_rows);
    t.finish();
    require(c.env_sample.n >= 1, "env_sample.n", "must be positive");
    require(c.env_sample.csv_rows >= 0, "env_sample.csv_rows", "must be nonnegative");
  }

  c.pm.direction = unit(d, 0);
  if (const json* v = s.find("pm")) {
    Section t(*v, "pm");
    t.read("direction", c.pm.direction);
    t.read("L", c.pm.L);
    t.read("L_tilde", c.pm.L_tilde);
    t.read("L_tilde_cap", c.pm.L_tilde_cap);
    t.read("M", c.pm.M);
    t.read("n_walks", c.pm.n_walks);
    t.read("horizon", c.pm.horizon);
    t.read("exact_environments", c.pm.exact_environments);
    t.read("solver_cap", c.pm.solver_cap);
    t.finish();
    check_direction(c.pm.direction, d, "pm.direction");
    require(!c.pm.L.empty() && !c.pm.M.empty(), "pm", "L and M lists must be nonempty");
    for (double L : c.pm.L) require(L >= 2, "pm.L", "every L must be >= 2");
    require(c.pm.L_tilde.empty() || c.pm.L_tilde.size() == c.pm.L.size(), "pm.L_tilde",
            "give one value per L or omit");
    require(c.pm.n_walks >= 100, "pm.n_walks", "must be at least 100");
    require(c.pm.horizon >= 1, "pm.horizon", "must be positive");
  }

  c.regen.direction = unit(d, 0);
  if (const json* v = s.find("regen")) {
    Section t(*v, "regen");
    t.read("direction", c.regen.direction);
    t.read("a", c.regen.a);
    t.read("confirmation_depth", c.regen.confirmation_depth);
    t.read("n_walks", c.regen.n_walks);
    t.read("horizon", c.regen.horizon);
    t.finish();
    check_direction(c.regen.direction, d, "regen.direction");
    require(c.regen.n_walks >= 1, "regen.n_walks", "must be positive");
    require(c.regen.horizon >= 1, "regen.horizon", "must be positive");
  }

  if (const json* v = s.find("tail")) {
    Section t(*v, "tail");
    t.read("source", c.tail.source);
    t.read("method", c.tail.method);
    t.read("k", c.tail.k);
    t.read("grid", c.tail.grid);
    t.read("grid_points", c.tail.grid_points);
    t.read("min_at_risk", c.tail.min_at_risk);
    t.read("pareto_alpha", c.tail.pareto_alpha);
    t.read("pareto_n", c.tail.pareto_n);
    t.finish();
    require(c.tail.source == "regeneration" || c.tail.source == "pareto", "tail.source",
            "expected regeneration or pareto");
    require(c.tail.method == "hill" || c.tail.method == "loglog", "tail.method", "expected hill or loglog");
    require(c.tail.pareto_alpha > 0, "tail.pareto_alpha", "must be positive");
    require(c.tail.grid_points >= 3, "tail.grid_points", "must be at least 3");
  }

  if (const json* v = s.find("trap")) {
    Section t(*v, "trap");
    t.read("e0_slot", c.trap.e0_slot);
    t.read("n_min", c.trap.n_min);
    t.read("n_max", c.trap.n_max);
    t.read("grid_points", c.trap.grid_points);
    t.read("draws", c.trap.draws);
    t.read("pairing", c.trap.pairing);
    t.finish();
    require(c.trap.e0_slot >= 0 && c.trap.e0_slot < 2 * d, "trap.e0_slot", "out of range");
    require(c.trap.n_min >= 1 && c.trap.n_max > c.trap.n_min, "trap", "need 1 <= n_min < n_max");
    require(c.trap.grid_points >= 3, "trap.grid_points", "must be at least 3");
    require(c.trap.draws >= 1, "trap.draws", "must be positive");
    require(c.trap.pairing == "factorized" || c.trap.pairing == "paired", "trap.pairing",
            "expected factorized or paired");
  }

  if (const json* v = s.find("flow")) {
    Section t(*v, "flow");
    t.read("alpha", c.flow.alpha);
    t.read("R", c.flow.R);
    t.read("slot", c.flow.slot);
    t.read("source", c.flow.source);
    t.read("target", c.flow.target);
    t.read("exact", c.flow.exact);
    t.read("selftest_instances", c.flow.selftest_instances);
    t.read("selftest_max_vertices", c.flow.selftest_max_vertices);
    t.finish();
  }
  if (c.flow.alpha.empty()) c.flow.alpha.assign(2 * d, 1.0);
  if (c.flow.source.empty()) c.flow.source.assign(d, 0);
  if (c.flow.target.empty()) {
    c.flow.target.assign(d, 0);
    c.flow.target[0] = 40;
  }
  require(c.flow.alpha.size() == static_cast<std::size_t>(2 * d), "flow.alpha", "expected 2d weights");
  require(c.flow.source.size() == static_cast<std::size_t>(d), "flow.source", "wrong dimension");
  require(c.flow.target.size() == static_cast<std::size_t>(d), "flow.target", "wrong dimension");
  require(c.flow.slot >= 0 && c.flow.slot < 2 * d, "flow.slot", "out of range");
  require(c.flow.selftest_max_vertices >= 2 && c.flow.selftest_max_vertices <= 12,
          "flow.selftest_max_vertices", "must lie in [2, 12]");

  if (const json* v = s.find("report")) {
    Section t(*v, "report");
    t.read("beta", c.report.beta);
    t.read("epsilon", c.report.epsilon);
    t.read("small_weight_axis", c.report.small_weight_axis);
    t.read("v_hat", c.report.v_hat);
    t.read("eta_samples", c.report.eta_samples);
    t.finish();
    if (c.report.v_hat) check_direction(*c.report.v_hat, d, "report.v_hat");
    require(c.report.eta_samples >= 0, "report.eta_samples", "must be nonnegative");
  }
  s.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json ExperimentConfig::resolved() const {
  json j;
  j["dimension"] = dimension;
  j["seed"] = seed;
  j["threads"] = threads;
  j["out"] = out;
  j["law"] = law ? law_spec : json(nullptr);
  j["env_sample"] = {{"n", env_sample.n}, {"csv_rows", env_sample.csv_rows}};
  j["pm"] = {{"direction", to_std(pm.direction)}, {"L", pm.L}, {"L_tilde", pm.L_tilde},
             {"L_tilde_cap", pm.L_tilde_cap}, {"M", pm.M}, {"n_walks", pm.n_walks},
             {"horizon", pm.horizon}, {"exact_environments", pm.exact_environments},
             {"solver_cap", pm.solver_cap}};
  j["regen"] = {{"direction", to_std(regen.direction)},
                {"a", regen.a ? json(*regen.a) : json(nullptr)},
                {"confirmation_depth", regen.confirmation_depth ? json(*regen.confirmation_depth) : json(nullptr)},
                {"n_walks", regen.n_walks},
                {"horizon", regen.horizon}};
  j["tail"] = {{"source", tail.source}, {"method", tail.method}, {"k", tail.k ? json(*tail.k) : json(nullptr)},
               {"grid", tail.grid}, {"grid_points", tail.grid_points}, {"min_at_risk", tail.min_at_risk},
               {"pareto_alpha", tail.pareto_alpha}, {"pareto_n", tail.pareto_n}};
  j["trap"] = {{"e0_slot", trap.e0_slot}, {"n_min", trap.n_min}, {"n_max", trap.n_max},
               {"grid_points", trap.grid_points}, {"draws", trap.draws}, {"pairing", trap.pairing}};
  j["flow"] = {{"alpha", flow.alpha}, {"R", flow.R ? json(*flow.R) : json(nullptr)}, {"slot", flow.slot},
               {"source", flow.source}, {"target", flow.target}, {"exact", flow.exact},
               {"selftest_instances", flow.selftest_instances},
               {"selftest_max_vertices", flow.selftest_max_vertices}};
  j["report"] = {{"beta", report.beta}, {"epsilon", report.epsilon ? json(*report.epsilon) : json(nullptr)},
                 {"small_weight_axis", report.small_weight_axis},
                 {"v_hat", report.v_hat ? json(to_std(*report.v_hat)) : json(nullptr)},
                 {"eta_samples", report.eta_samples}};
  return j;
}

}  // namespace rwre::config
