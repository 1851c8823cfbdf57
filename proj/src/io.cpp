#include "passivity/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace passivity {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* name, const std::string& path) {
  if (!obj.is_object()) throw FormatError(path + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) throw FormatError(path + "." + name + ": missing field");
  return *it;
}

std::string join(const std::string& path, const char* name) {
  return path.empty() ? std::string(name) : path + "." + name;
}

std::string at(const std::string& path, std::size_t k) {
  return path + "[" + std::to_string(k) + "]";
}

double finite_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw FormatError(path + ": value is not finite");
  return x;
}

Complex complex_entry(const json& v, const std::string& path) {
  if (v.is_number()) return {finite_number(v, path), 0.0};
  if (!v.is_object()) throw FormatError(path + ": expected a number or {re, im}");
  const double re = finite_number(field(v, "re", path), path + ".re");
  const double im = v.contains("im") ? finite_number(v["im"], path + ".im") : 0.0;
  return {re, im};
}

const json& square_rows(const json& v, int p, const std::string& path) {
  if (!v.is_array() || static_cast<int>(v.size()) != p) {
    throw FormatError(path + ": expected " + std::to_string(p) + " rows");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != p) {
      throw FormatError(at(path, i) + ": expected " + std::to_string(p) + " columns");
    }
  }
  return v;
}

json complex_to_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

PoleResidueModel model_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("model: top level must be an object");
  PoleResidueModel model;

  const json& pc = field(doc, "port_count", "");
  if (!pc.is_number_integer() || pc.get<long>() < 1 || pc.get<long>() > 100000) {
    throw FormatError("port_count: expected a positive integer");
  }
  const int p = pc.get<int>();
  model.port_count = p;
  model.omega_max = finite_number(field(doc, "omega_max", ""), "omega_max");

  const json& d = square_rows(field(doc, "direct_term", ""), p, "direct_term");
  model.direct_term.resize(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      model.direct_term(i, j) =
          finite_number(d[i][j], at(at("direct_term", static_cast<std::size_t>(i)), static_cast<std::size_t>(j)));
    }
  }

  const json& poles = field(doc, "poles", "");
  const json& residues = field(doc, "residues", "");
  if (!poles.is_array()) throw FormatError("poles: expected an array");
  if (!residues.is_array()) throw FormatError("residues: expected an array");
  if (poles.size() != residues.size()) {
    throw FormatError("residues: expected one entry per pole (" + std::to_string(poles.size()) +
                      "), got " + std::to_string(residues.size()));
  }
  for (std::size_t n = 0; n < poles.size(); ++n) {
    const std::string ppath = at("poles", n);
    const json& pole = poles[n];
    PoleTerm term;
    term.pole = complex_entry(pole, ppath);
    if (pole.is_object() && pole.contains("is_pair")) {
      if (!pole["is_pair"].is_boolean()) throw FormatError(ppath + ".is_pair: expected a boolean");
      term.is_pair = pole["is_pair"].get<bool>();
    }
    const std::string rpath = at("residues", n);
    const json& r = square_rows(residues[n], p, rpath);
    term.residue.resize(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        term.residue(i, j) = complex_entry(
            r[i][j], at(at(rpath, static_cast<std::size_t>(i)), static_cast<std::size_t>(j)));
      }
    }
    model.terms.push_back(std::move(term));
  }

  const auto violations = validate(model);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid model:";
    for (const auto& v : violations) {
      os << "\n  ";
      if (v.index >= 0) os << at("poles", static_cast<std::size_t>(v.index)) << ": ";
      os << v.message;
    }
    throw FormatError(os.str());
  }
  return model;
}

PoleResidueModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  } catch (const json::out_of_range& e) {
    throw FormatError(std::string("number is not finite: ") + e.what());
  }
  return model_from_json(doc);
}

PoleResidueModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json model_to_json(const PoleResidueModel& model) {
  const int p = model.port_count;
  json d = json::array();
  for (int i = 0; i < p; ++i) {
    json row = json::array();
    for (int j = 0; j < p; ++j) row.push_back(model.direct_term(i, j));
    d.push_back(row);
  }
  json poles = json::array();
  json residues = json::array();
  for (const auto& term : model.terms) {
    poles.push_back({{"re", term.pole.real()}, {"im", term.pole.imag()}, {"is_pair", term.is_pair}});
    json r = json::array();
    for (int i = 0; i < p; ++i) {
      json row = json::array();
      for (int j = 0; j < p; ++j) row.push_back(complex_to_json(term.residue(i, j)));
      r.push_back(row);
    }
    residues.push_back(r);
  }
  return {{"port_count", p},
          {"omega_max", model.omega_max},
          {"direct_term", d},
          {"poles", poles},
          {"residues", residues}};
}

PoleResidueModel hz_to_rad(const PoleResidueModel& model) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  PoleResidueModel out = model;
  out.omega_max *= two_pi;
  for (auto& term : out.terms) {
    term.pole *= two_pi;
    term.residue *= two_pi;
  }
  return out;
}

json number_to_json(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double number_from_json(const json& value, const std::string& path) {
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    throw FormatError(path + ": unexpected string \"" + s + "\"");
  }
  if (!value.is_number()) throw FormatError(path + ": expected a number");
  return value.get<double>();
}

json band_to_json(const ViolationBand& band) {
  return {{"omega_lo", number_to_json(band.omega_lo)},
          {"omega_hi", number_to_json(band.omega_hi)},
          {"omega_peak", number_to_json(band.omega_peak)},
          {"phi_peak", band.phi_peak}};
}

json bands_to_json(const std::vector<ViolationBand>& bands) {
  json out = json::array();
  for (const auto& b : bands) out.push_back(band_to_json(b));
  return out;
}

json report_to_json(const PassivityReport& report, bool with_timing) {
  json points = json::array();
  for (double w : report.control_points) points.push_back(number_to_json(w));
  json doc = {
      {"schema_version", kReportSchemaVersion},
      {"mode", report.mode},
      {"gamma", report.gamma},
      {"passive", report.passive},
      {"bands", bands_to_json(report.bands)},
      {"subband_count", report.subband_count},
      {"control_points", points},
      {"counts",
       {{"total_evaluations", report.total_evaluations},
        {"refine_evaluations", report.refine_evaluations},
        {"subband_evaluations", report.subband_evaluations},
        {"violation_samples", report.violation_samples},
        {"retained_maxima", report.retained_maxima},
        {"dropped_edge_maxima", report.dropped_edge_maxima}}},
  };
  if (with_timing) doc["timing"] = {{"wall_time_s", report.wall_time_s}};
  return doc;
}

PassivityReport report_from_json(const json& doc) {
  const json& version = field(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kReportSchemaVersion) {
    throw FormatError("schema_version: unsupported report version");
  }
  PassivityReport r;
  r.mode = field(doc, "mode", "").get<std::string>();
  r.gamma = number_from_json(field(doc, "gamma", ""), "gamma");
  r.passive = field(doc, "passive", "").get<bool>();
  const json& bands = field(doc, "bands", "");
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const std::string path = at("bands", k);
    const json& b = bands[k];
    r.bands.push_back({number_from_json(field(b, "omega_lo", path), join(path, "omega_lo")),
                       number_from_json(field(b, "omega_hi", path), join(path, "omega_hi")),
                       number_from_json(field(b, "omega_peak", path), join(path, "omega_peak")),
                       number_from_json(field(b, "phi_peak", path), join(path, "phi_peak"))});
  }
  r.subband_count = field(doc, "subband_count", "").get<int>();
  const json& points = field(doc, "control_points", "");
  for (std::size_t k = 0; k < points.size(); ++k) {
    r.control_points.push_back(number_from_json(points[k], at("control_points", k)));
  }
  const json& counts = field(doc, "counts", "");
  r.total_evaluations = field(counts, "total_evaluations", "counts").get<long>();
  r.refine_evaluations = field(counts, "refine_evaluations", "counts").get<long>();
  r.subband_evaluations = field(counts, "subband_evaluations", "counts").get<std::vector<long>>();
  r.violation_samples = field(counts, "violation_samples", "counts").get<long>();
  r.retained_maxima = field(counts, "retained_maxima", "counts").get<long>();
  r.dropped_edge_maxima = field(counts, "dropped_edge_maxima", "counts").get<long>();
  if (doc.contains("timing")) {
    r.wall_time_s = field(doc["timing"], "wall_time_s", "timing").get<double>();
  }
  return r;
}

std::string samples_csv(const PassivityReport& report) {
  std::string out = "omega,zeta,phi,subband,is_violation\n";
  for (const auto& s : report.samples) {
    out += format_number(s.omega);
    out += ',';
    out += format_number(s.zeta);
    out += ',';
    out += format_number(s.phi);
    out += ',';
    out += std::to_string(s.subband);
    out += s.phi > report.gamma ? ",1\n" : ",0\n";
  }
  return out;
}

json control_points_to_json(const ControlPointSet& points) {
  json out = json::array();
  for (double w : points.points) out.push_back(number_to_json(w));
  return out;
}

json crossings_to_json(const CrossingSet& crossings) {
  return {{"frequencies", crossings.frequencies}, {"tolerance", crossings.tolerance}};
}

json verdict_to_json(const OracleVerdict& verdict) {
  return {{"passive", verdict.passive},
          {"form", verdict.kind == HamiltonianKind::FullMatrix ? "matrix" : "pencil"},
          {"crossings", crossings_to_json(verdict.crossings)},
          {"bands", bands_to_json(verdict.bands)}};
}

std::string trace_jsonl(const PassivityReport& report) {
  std::string out;
  for (std::size_t l = 0; l < report.trace.size(); ++l) {
    for (const auto& rec : report.trace[l]) {
      const json line = {{"subband", l},
                         {"mu", rec.iteration},
                         {"h", rec.level},
                         {"leaf", rec.expanded_index},
                         {"S", {rec.stop.s1, rec.stop.s2, rec.stop.s3}},
                         {"U", {rec.budget_flags.u1, rec.budget_flags.u2, rec.budget_flags.u3}},
                         {"K", rec.eval_count},
                         {"budget", rec.budget},
                         {"epsilon", rec.epsilon},
                         {"theta_max", rec.theta_max}};
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace passivity
