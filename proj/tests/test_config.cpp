#include "rwre/config.hpp"
#include "rwre/errors.hpp"
#include "rwre/flows/box_flow.hpp"
#include "rwre/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace rwre;
using config::json;

namespace {

std::string config_error(const json& j) {
  try {
    config::parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults and resolution") {
  const auto c = config::parse_config(json::parse(R"({"law": {"type": "dirichlet", "beta": [1, 2, 3, 4]}})"));
  CHECK(c.dimension == 2);
  CHECK(c.seed == 1);
  REQUIRE(c.law);
  CHECK(c.law->tag() == "dirichlet");
  CHECK(c.pm.L == std::vector<double>{4, 6, 8, 10});
  CHECK(c.flow.target == std::vector<std::int64_t>{40, 0});
  const auto r = c.resolved();
  CHECK(r.contains("pm"));
  CHECK(r["law"]["type"] == "dirichlet");
  CHECK(config::parse_config(r).resolved() == r);
}

TEST_CASE("unknown and malformed keys are named") {
  CHECK(config_error(json::parse(R"({"pm": {"Lx": 3}})")).find("pm.Lx") != std::string::npos);
  CHECK(config_error(json::parse(R"({"bogus": 1})")).find("bogus") != std::string::npos);
  CHECK(config_error(json::parse(R"({"pm": {"L": [1]}})")).find("pm.L") != std::string::npos);
  CHECK(config_error(json::parse(R"({"seed": "x"})")).find("seed") != std::string::npos);
  CHECK(config_error(json::parse(R"({"law": {"type": "dirichlet", "beta": [1, 0, 1, 1]}})")).find("law") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"law": {"type": "nope"}})")).find("law.type") != std::string::npos);
  CHECK_THROWS_AS(config::load_config("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("law parsing") {
  const auto ratio = config::parse_law(
      json::parse(R"({"type": "ratio", "r": 3, "base": {"type": "dirichlet", "transverse_beta": [1, 1]}})"), 2);
  CHECK(ratio.tag() == "ratio");
  CHECK(config::parse_law(json::parse(R"({"type": "nonballistic"})"), 2).dim() == 2);
  CHECK(config::parse_law(json::parse(R"({"type": "uniform"})"), 3).dim() == 3);
}

TEST_CASE("number formatting and csv") {
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(3.0) == "3");
  CHECK(io::csv_escape("a,b") == "\"a,b\"");
  CHECK(io::csv_escape("say \"x\"") == "\"say \"\"x\"\"\"");
  CHECK(io::csv_escape("plain") == "plain");
  std::ostringstream os;
  io::CsvWriter w(os, {"u", "s"});
  w << 1.5 << "x,y";
  w.end_row();
  CHECK(os.str() == "u,s\r\n1.5,\"x,y\"\r\n");
  w << 1.0;
  CHECK_THROWS_AS(w.end_row(), ContractError);
}

TEST_CASE("flow files round trip") {
  flows::ThetaSpec spec;
  spec.source = lattice::Site{0, 0};
  spec.target = lattice::Site{20, 0};
  spec.alpha = {1, 1, 1, 1};
  spec.R = 6;
  const auto theta = flows::build_theta(spec);
  const json j = io::flow_to_json(spec, theta.flow);
  const auto back = io::flow_from_json(json::parse(j.dump()));
  REQUIRE(std::holds_alternative<flows::ExactFlow>(back.flow));
  const auto& f = std::get<flows::ExactFlow>(back.flow);
  CHECK(f.support_size() == theta.flow.support_size());
  CHECK(flows::verify_flow_certificate(f, back.spec).all_passed());
  CHECK_THROWS_AS(io::flow_from_json(json::parse(R"({"edges": 3})")), ConfigError);
}
