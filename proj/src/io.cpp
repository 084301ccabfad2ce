#include "rwre/io.hpp"

#include "rwre/errors.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace rwre::io {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
  for (const auto& h : header) *this << h;
  end_row();
}

CsvWriter& CsvWriter::operator<<(const std::string& field) {
  if (filled_ > 0) out_ << ',';
  out_ << csv_escape(field);
  ++filled_;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_)
    throw ContractError("csv row has " + std::to_string(filled_) + " fields, expected " + std::to_string(columns_));
  out_ << "\r\n";
  filled_ = 0;
}

namespace {

// JSON has no infinity; non-finite values become strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json site_json(const lattice::Site& s) {
  json a = json::array();
  for (int j = 0; j < s.dim(); ++j) a.push_back(s[j]);
  return a;
}

lattice::Site site_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + path + "': expected an integer array");
  lattice::Site s(static_cast<int>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number_integer()) throw ConfigError("'" + path + "': expected integers");
    s[static_cast<int>(k)] = j[k].get<std::int64_t>();
  }
  return s;
}

}  // namespace

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(num(v[k]));
  return a;
}

json to_json(const cond::PMReport& r) {
  json j;
  j["l"] = to_json(r.l);
  j["L"] = r.L;
  j["L_tilde"] = r.L_tilde;
  j["M"] = r.M;
  j["n_walks"] = r.n_walks;
  j["non_front"] = r.non_front;
  j["censored"] = r.censored;
  j["p_hat"] = r.p_hat;
  j["ci"] = {r.ci.lo, r.ci.hi};
  j["ci_halfwidth"] = r.ci.halfwidth();
  j["threshold"] = r.threshold;
  j["verdict"] = cond::to_string(r.verdict);
  j["estimate"] = r.estimate();
  j["estimate_source"] = r.exact_annealed ? "exact_annealed" : "monte_carlo";
  if (r.exact_annealed) {
    j["exact_annealed"] = *r.exact_annealed;
    j["exact_standard_error"] = r.exact_standard_error;
    j["exact_environments"] = r.exact_environments;
  } else {
    j["exact_annealed"] = nullptr;
  }
  return j;
}

json to_json(const cond::EtaEstimate& e) {
  return {{"alpha", e.alpha},
          {"value", num(e.value)},
          {"argmax_slot", e.argmax_slot},
          {"slots", e.slots},
          {"per_slot", [&] {
             json a = json::array();
             for (double v : e.per_slot) a.push_back(num(v));
             return a;
           }()},
          {"half_sample_value", num(e.half_sample_value)},
          {"tail_index", num(e.tail_index)},
          {"divergence_suspected", e.divergence_suspected},
          {"n_samples", e.n_samples}};
}

json to_json(const cond::HypothesisReport& r) {
  json j;
  j["weights"] = r.weights;
  j["kappa"] = r.kappa_value;
  json levels = json::array();
  for (const auto& l : r.E_prime_levels)
    levels.push_back({{"name", l.name}, {"threshold", l.threshold}, {"satisfied", l.satisfied}});
  j["E_prime_levels"] = levels;
  j["lln"] = r.lln;
  j["annealed_clt"] = r.annealed_clt;
  j["quenched_clt"] = r.quenched_clt;
  j["kalikow"] = r.kalikow;
  if (r.small_weight)
    j["small_weight_region"] = {{"in_region", r.small_weight->in_region},
                                {"epsilon", r.small_weight->epsilon},
                                {"axis", r.small_weight->axis},
                                {"weight", r.small_weight->weight},
                                {"caveat", r.small_weight->caveat}};
  else
    j["small_weight_region"] = nullptr;
  j["E_prime_toward_v_hat"] = r.E_prime_toward_v_hat ? json(*r.E_prime_toward_v_hat) : json(nullptr);
  j["alpha_bar"] = r.alpha_bar;
  j["eta_half_alpha_bar"] = num(r.eta_half_alpha_bar);
  j["c0_log10"] = num(r.c0_log10);
  j["eta_all_directions"] = r.eta_all ? to_json(*r.eta_all) : json(nullptr);
  j["eta_half_space"] = r.eta_half_space ? to_json(*r.eta_half_space) : json(nullptr);
  j["notes"] = r.notes;
  return j;
}

json to_json(const regen::RenewalStats& s) {
  json cov = json::array();
  for (Eigen::Index i = 0; i < s.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < s.covariance.cols(); ++k) row.push_back(num(s.covariance(i, k)));
    cov.push_back(row);
  }
  return {{"velocity", to_json(s.velocity)},
          {"velocity_se", to_json(s.velocity_se)},
          {"velocity_ci95_lo", to_json(s.velocity - 1.959963984540054 * s.velocity_se)},
          {"velocity_ci95_hi", to_json(s.velocity + 1.959963984540054 * s.velocity_se)},
          {"gap_mean", s.gap_mean},
          {"gap_second_moment", s.gap_second_moment},
          {"covariance", cov},
          {"n_gaps", s.n_gaps},
          {"records_used", s.records_used},
          {"censored_records", s.censored_records}};
}

json to_json(const regen::TailEstimate& t) {
  json j;
  j["method"] = regen::to_string(t.method);
  j["exponent"] = num(t.exponent);
  j["standard_error"] = num(t.standard_error);
  j["n_samples"] = t.n_samples;
  j["censored_count"] = t.censored_count;
  if (t.method == regen::TailMethod::hill) {
    j["k"] = t.k;
    j["k_fraction"] = t.k_fraction;
  } else {
    json g = json::array();
    for (double u : t.grid) g.push_back(num(u));
    j["grid"] = g;
  }
  j["light_tail_suspected"] = t.light_tail_suspected;
  return j;
}

json to_json(const flows::CertificateReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}, {"detail", c.detail}});
  return {{"all_passed", r.all_passed()}, {"kappa", r.kappa}, {"gamma", r.gamma}, {"checks", checks}};
}

json to_json(const flows::ThetaSpec& s) {
  return {{"source", site_json(s.source)}, {"target", site_json(s.target)}, {"slot", s.slot},
          {"alpha", s.alpha}, {"R", s.R}};
}

namespace {

template <class S>
json flow_json(const flows::ThetaSpec& spec, const flows::BasicFlow<S>& flow) {
  json edges = json::array();
  const auto& g = *flow.graph;
  for (int e = 0; e < g.edge_count(); ++e) {
    if (flow.values[e] == S(0)) continue;
    const auto& le = g.lattice_edge(e);
    json v;
    if constexpr (std::is_same_v<S, flows::Rational>) v = flows::to_string(flow.values[e]);
    else v = flow.values[e];
    edges.push_back({{"from", site_json(le.from)}, {"slot", le.slot}, {"to", site_json(le.to())}, {"value", v}});
  }
  return {{"spec", to_json(spec)},
          {"number_format", std::is_same_v<S, flows::Rational> ? "rational" : "decimal"},
          {"edges", edges}};
}

}  // namespace

json flow_to_json(const flows::ThetaSpec& spec, const flows::ExactFlow& flow) { return flow_json(spec, flow); }
json flow_to_json(const flows::ThetaSpec& spec, const flows::Flow& flow) { return flow_json(spec, flow); }

LoadedFlow flow_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("spec") || !j.contains("edges"))
      throw ConfigError("flow file needs 'spec' and 'edges'");
    const json& sp = j.at("spec");
    flows::ThetaSpec spec;
    spec.source = site_from(sp.at("source"), "spec.source");
    spec.target = site_from(sp.at("target"), "spec.target");
    spec.slot = sp.at("slot").get<int>();
    spec.alpha = sp.at("alpha").get<std::vector<double>>();
    spec.R = sp.at("R").get<int>();
    if (spec.target.dim() != spec.source.dim() || spec.alpha.size() != 2u * spec.source.dim() ||
        spec.slot < 0 || spec.slot >= 2 * spec.source.dim())
      throw ConfigError("flow spec is inconsistent");

    const std::string format = j.value("number_format", "rational");
    if (format != "rational" && format != "decimal") throw ConfigError("'number_format' must be rational or decimal");
    flows::ThetaGraphBuilder builder(spec);
    std::vector<flows::Rational> exact;
    std::vector<double> approx;
    const int d = spec.source.dim();
    for (const json& e : j.at("edges")) {
      const auto from = site_from(e.at("from"), "edges.from");
      const int slot = e.at("slot").get<int>();
      if (from.dim() != d || slot < 0 || slot >= 2 * d) throw ConfigError("edge with bad site or slot");
      if (e.contains("to") && !(site_from(e.at("to"), "edges.to") == from + lattice::unit_step(d, slot)))
        throw ConfigError("edge 'to' does not match 'from' + slot");
      const int u = builder.vertex(from);
      const int v = builder.vertex(from + lattice::unit_step(d, slot));
      if (u == v) throw ConfigError("edge joins a merged pair to itself");
      builder.graph->add_lattice_edge(from, slot);
      const json& val = e.at("value");
      if (format == "rational") {
        if (!val.is_string()) throw ConfigError("rational values must be strings like \"1/48\"");
        exact.emplace_back(flows::Rational(val.get<std::string>()));
      } else {
        if (!val.is_number()) throw ConfigError("decimal values must be numbers");
        approx.push_back(val.get<double>());
      }
    }
    LoadedFlow out{spec, flows::ExactFlow{}};
    if (format == "rational") {
      flows::ExactFlow f(builder.graph);
      f.values = std::move(exact);
      out.flow = std::move(f);
    } else {
      flows::Flow f(builder.graph);
      f.values = std::move(approx);
      out.flow = std::move(f);
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed flow file: ") + e.what());
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("malformed flow file: ") + e.what());
  }
}

}  // namespace rwre::io
