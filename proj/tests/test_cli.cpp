#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "rwre_cli_test";

int run(const std::string& args, std::string* output = nullptr) {
  const fs::path log = kRoot / "last.log";
  const std::string cmd = std::string(RWRE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out_dir(const std::string& name) { return (kRoot / name).string(); }

}  // namespace

TEST_CASE("config errors exit with 2 and name the key") {
  std::string msg;
  const auto bad = write_config("bad.json", R"({"env_sample": {"nn": 5}})");
  CHECK(run("env-sample --config " + bad.string() + " --out " + out_dir("bad"), &msg) == 2);
  CHECK(msg.find("env_sample.nn") != std::string::npos);

  const auto small_L = write_config("l1.json", R"({"pm": {"L": [1]}})");
  CHECK(run("pm-check --config " + small_L.string() + " --out " + out_dir("l1")) == 2);

  const auto broken = write_config("broken.json", "{ not json");
  CHECK(run("report --config " + broken.string() + " --out " + out_dir("broken")) == 2);
}

TEST_CASE("env-sample is reproducible byte for byte") {
  const auto cfg = write_config(
      "env.json", R"({"law": {"type": "dirichlet", "beta": [1, 2, 3, 4]}, "env_sample": {"n": 20000, "csv_rows": 50}})");
  const std::vector<std::string> files{"samples.csv", "summary.json", "config.resolved.json", "schema.json"};
  REQUIRE(run("env-sample --config " + cfg.string() + " --out " + out_dir("env1")) == 0);
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(slurp(fs::path(out_dir("env1")) / f));
  REQUIRE(run("env-sample --config " + cfg.string() + " --out " + out_dir("env1")) == 0);
  for (std::size_t i = 0; i < files.size(); ++i) {
    CHECK_MESSAGE(!first[i].empty(), files[i]);
    CHECK_MESSAGE(first[i] == slurp(fs::path(out_dir("env1")) / files[i]), files[i]);
  }
  CHECK(slurp(fs::path(out_dir("env1")) / "samples.csv").find("\r\n") != std::string::npos);

  // RWRE_SEED changes the sample
  REQUIRE(run("env-sample --config " + cfg.string() + " --out " + out_dir("env3") + " --seed 9") == 0);
  CHECK(slurp(fs::path(out_dir("env1")) / "samples.csv") != slurp(fs::path(out_dir("env3")) / "samples.csv"));
}

TEST_CASE("nonballistic law rows keep the ratio") {
  const auto cfg = write_config("nonballistic.json", R"({"law": {"type": "nonballistic"}, "env_sample": {"n": 5000}})");
  REQUIRE(run("env-sample --config " + cfg.string() + " --out " + out_dir("nonballistic")) == 0);
  const auto summary = nlohmann::json::parse(slurp(fs::path(out_dir("nonballistic")) / "summary.json"));
  CHECK(summary["max_relative_deviation_e1_vs_2_minus_e1"].get<double>() < 1e-12);
}

TEST_CASE("all-censored tail run exits with 3") {
  const auto cfg = write_config(
      "tail.json",
      R"({"law": {"type": "uniform"}, "regen": {"n_walks": 4, "horizon": 200}, "tail": {"source": "regeneration"}})");
  std::string msg;
  CHECK(run("tail --config " + cfg.string() + " --out " + out_dir("tail"), &msg) == 3);
  CHECK(msg.find("censored") != std::string::npos);
}

TEST_CASE("pareto self-test through the tail command") {
  const auto cfg = write_config("pareto.json", R"({"tail": {"source": "pareto", "pareto_alpha": 2}})");
  REQUIRE(run("tail --config " + cfg.string() + " --out " + out_dir("pareto")) == 0);
  CHECK(fs::exists(fs::path(out_dir("pareto")) / "tail.json"));
  CHECK(fs::exists(fs::path(out_dir("pareto")) / "hill_plot.csv"));
}

TEST_CASE("flow build, verify and tamper") {
  const auto cfg = write_config("flow.json", R"({"flow": {"target": [20, 0]}})");
  REQUIRE(run("flow-build --config " + cfg.string() + " --out " + out_dir("flow")) == 0);
  const fs::path theta = fs::path(out_dir("flow")) / "theta.json";
  REQUIRE(fs::exists(theta));
  CHECK(run("flow-verify --flow " + theta.string() + " --out " + out_dir("verify")) == 0);

  std::string text = slurp(theta);
  const auto pos = text.find("\"1/8\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 5, "\"1/2\"");
  const fs::path tampered = kRoot / "tampered.json";
  std::ofstream(tampered) << text;
  std::string msg;
  CHECK(run("flow-verify --flow " + tampered.string() + " --out " + out_dir("tampered"), &msg) == 4);
  CHECK(msg.find("capacity_bound") != std::string::npos);

  CHECK(run("flow-verify --selftest --out " + out_dir("selftest")) == 0);
}

TEST_CASE("report command") {
  const auto cfg = write_config("report.json", R"({"law": {"type": "dirichlet", "beta": [1.5, 0.4, 0.2, 0.4]}})");
  REQUIRE(run("report --config " + cfg.string() + " --out " + out_dir("report")) == 0);
  const auto j = nlohmann::json::parse(slurp(fs::path(out_dir("report")) / "hypothesis.json"));
  CHECK(j["kalikow"] == true);
  CHECK(j["kappa"].get<double>() == doctest::Approx(3.3));
}

TEST_CASE("environment variables mirror flags") {
  const auto cfg = write_config("envvar.json", R"({"law": {"type": "uniform"}, "env_sample": {"n": 1000, "csv_rows": 5}})");
  const std::string cmd = "RWRE_CONFIG=" + cfg.string() + " RWRE_OUT=" + out_dir("envvar") + " " + RWRE_CLI +
                          " env-sample > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(fs::path(out_dir("envvar")) / "samples.csv"));
}
