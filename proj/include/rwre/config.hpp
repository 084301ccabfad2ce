#pragma once

// Experiment configuration: one JSON file, validated on load. Unknown keys
// are rejected with their full path; `resolved()` echoes every default.

#include "rwre/environment.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rwre::config {

using json = nlohmann::ordered_json;

struct EnvSampleSection {
  std::int64_t n = 100000;
  std::int64_t csv_rows = 1000;
};

struct PMSection {
  Eigen::VectorXd direction;  // default e_1
  std::vector<double> L{4, 6, 8, 10};
  std::vector<double> L_tilde;  // empty: min(70 L^3, L_tilde_cap)
  double L_tilde_cap = 500;
  std::vector<double> M{1};
  std::int64_t n_walks = 10000;
  std::int64_t horizon = 1000000;
  int exact_environments = 10;
  std::int64_t solver_cap = 20000;
};

struct RegenSection {
  Eigen::VectorXd direction;  // default e_1
  std::optional<double> a;
  std::optional<double> confirmation_depth;
  std::int64_t n_walks = 200;
  std::int64_t horizon = 100000;
};

struct TailSection {
  std::string source = "regeneration";  // or "pareto"
  std::string method = "hill";
  std::optional<std::int64_t> k;
  std::vector<double> grid;
  int grid_points = 25;
  std::int64_t min_at_risk = 10;
  double pareto_alpha = 2.0;
  std::int64_t pareto_n = 100000;
};

struct TrapSection {
  int e0_slot = 0;
  double n_min = 100;
  double n_max = 10000;
  int grid_points = 20;
  std::int64_t draws = 1000000;
  std::string pairing = "factorized";
};

struct FlowSection {
  std::vector<double> alpha;  // default all ones
  std::optional<int> R;       // default: smallest admissible radius
  int slot = 0;
  std::vector<std::int64_t> source;  // default origin
  std::vector<std::int64_t> target;  // default 40 e_1
  bool exact = true;
  std::int64_t selftest_instances = 1000;
  int selftest_max_vertices = 7;
};

struct ReportSection {
  std::vector<double> beta;  // default: the Dirichlet law's parameters
  std::optional<double> epsilon;
  int small_weight_axis = 0;
  std::optional<Eigen::VectorXd> v_hat;
  std::int64_t eta_samples = 0;
};

struct ExperimentConfig {
  int dimension = 2;
  json law_spec;
  std::optional<env::EnvironmentLaw> law;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "out";
  EnvSampleSection env_sample;
  PMSection pm;
  RegenSection regen;
  TailSection tail;
  TrapSection trap;
  FlowSection flow;
  ReportSection report;

  /// Every field, defaults included, in a stable key order.
  json resolved() const;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);
env::EnvironmentLaw parse_law(const json& spec, int dimension);

}  // namespace rwre::config
