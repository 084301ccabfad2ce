#pragma once

// JSON and CSV forms of the library's results, and flow files.

#include "rwre/conditions.hpp"
#include "rwre/config.hpp"
#include "rwre/flows/box_flow.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/tail.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace rwre::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// RFC 4180 writer; fields containing a comma, quote or newline are quoted.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  CsvWriter& operator<<(const std::string& field);
  CsvWriter& operator<<(const char* field) { return *this << std::string(field); }
  CsvWriter& operator<<(double v) { return *this << format_number(v); }
  CsvWriter& operator<<(std::int64_t v) { return *this << std::to_string(v); }
  CsvWriter& operator<<(int v) { return *this << std::to_string(v); }
  CsvWriter& operator<<(std::size_t v) { return *this << std::to_string(v); }
  /// Throws ContractError unless the row has one field per column.
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

std::string csv_escape(const std::string& field);

json to_json(const Eigen::VectorXd& v);
json to_json(const cond::PMReport& r);
json to_json(const cond::EtaEstimate& e);
json to_json(const cond::HypothesisReport& r);
json to_json(const regen::RenewalStats& s);
json to_json(const regen::TailEstimate& t);
json to_json(const flows::CertificateReport& r);
json to_json(const flows::ThetaSpec& s);

/// {"spec", "number_format", "edges": [{from, slot, to, value}], ...}.
/// Rational values are written as "p/q" strings, doubles as numbers.
json flow_to_json(const flows::ThetaSpec& spec, const flows::ExactFlow& flow);
json flow_to_json(const flows::ThetaSpec& spec, const flows::Flow& flow);

struct LoadedFlow {
  flows::ThetaSpec spec;
  std::variant<flows::ExactFlow, flows::Flow> flow;
};

/// Rebuilds a flow file on a fresh lattice graph. Throws ConfigError on
/// malformed input (the flow itself is not checked here).
LoadedFlow flow_from_json(const json& j);

}  // namespace rwre::io
