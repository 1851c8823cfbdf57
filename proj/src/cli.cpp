#include "passivity/cli.hpp"

#include "passivity/corpus.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace passivity {

using nlohmann::json;

int effective_workers(int requested) {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("PASSCHECK_MAX_WORKERS")) {
    const int limit = std::atoi(env);
    if (limit >= 1) cap = std::min(cap, limit);
  }
  return std::clamp(requested, 1, cap);
}

ModePreset resolve_preset(const std::string& mode, const PresetOverrides& o) {
  const auto parsed = parse_mode(mode);
  if (!parsed) throw std::invalid_argument("unknown mode '" + mode + "' (expected soft, hard or final)");
  ModePreset p = preset(*parsed);
  auto& w = p.warp;
  auto& s = p.search;
  if (o.rho) w.rho = *o.rho;
  if (o.r_cp) w.r_cp = *o.r_cp;
  if (o.r_rp) w.r_rp = *o.r_rp;
  if (o.r_hf) w.r_hf = *o.r_hf;
  if (o.c) w.c = *o.c;
  if (o.q_max) w.q_max = *o.q_max;
  if (o.kappa) w.kappa = *o.kappa;
  if (o.decades) w.decades = *o.decades;
  if (o.partition) s.partition = *o.partition;
  if (o.initial_level) s.initial_level = *o.initial_level;
  if (o.delta_zeta) s.delta_zeta = *o.delta_zeta;
  if (o.delta_theta) s.delta_theta = *o.delta_theta;
  if (o.delta_eta) s.delta_eta = *o.delta_eta;
  if (o.epsilon0) s.epsilon0 = *o.epsilon0;
  if (o.rho_eps) s.rho_eps = *o.rho_eps;
  if (o.budget_schedule) s.budget_schedule = *o.budget_schedule;
  if (o.basket_reuse) s.basket_reuse = *o.basket_reuse;
  check_warp_params(w);
  check_search_config(s);
  return p;
}

std::string to_string(Agreement a) {
  switch (a) {
    case Agreement::TP: return "TP";
    case Agreement::FP: return "FP";
    case Agreement::FN: return "FN";
  }
  return "unknown";
}

Comparison compare_model(const PoleResidueModel& model, const ModePreset& preset,
                         const VerifierOptions& options, long dense_count,
                         const OracleOptions& oracle_options) {
  Comparison c;
  c.report = check_passivity(model, preset, options);
  c.oracle = oracle_verdict(realize(model), model, oracle_options);
  if (c.report.passive == c.oracle.passive) return c;

  c.agreement = c.report.passive ? Agreement::FP : Agreement::FN;
  c.dense = dense_reference_check(model, dense_count, preset.warp, preset.search.gamma);
  const bool dense_passive = !c.dense->violation;
  c.adjudication = dense_passive == c.report.passive ? "adaptive" : "oracle";
  // The dense grid can miss a violation the adaptive check localized; a
  // violating sample of the adaptive check itself is equally conclusive.
  if (c.agreement == Agreement::FN) {
    const bool confirmed = c.dense->violation || !c.report.bands.empty();
    if (confirmed) c.adjudication = "adaptive";
    c.passive_but_fn = confirmed;
  }
  return c;
}

json comparison_to_json(const Comparison& c, bool with_timing) {
  json doc = {{"schema_version", kReportSchemaVersion},
              {"agreement", to_string(c.agreement)},
              {"passive_but_fn", c.passive_but_fn},
              {"adaptive", report_to_json(c.report, with_timing)},
              {"oracle", verdict_to_json(c.oracle)}};
  if (!c.adjudication.empty()) doc["adjudication"] = c.adjudication;
  if (c.dense) {
    doc["dense"] = {{"count", c.dense->count},
                    {"violation", c.dense->violation},
                    {"worst_omega", number_to_json(c.dense->worst_omega)},
                    {"worst_phi", c.dense->worst_phi}};
  }
  return doc;
}

namespace {

PoleResidueModel load(const RunSpec& spec) {
  if (spec.model_path.empty()) throw std::invalid_argument("--model is required");
  PoleResidueModel model = load_model(spec.model_path);
  return spec.hz ? hz_to_rad(model) : model;
}

VerifierOptions verifier_options(const RunSpec& spec) {
  VerifierOptions o;
  o.refine_tol = spec.refine_tol;
  o.workers = effective_workers(spec.workers);
  o.collect_trace = !spec.trace_path.empty();
  return o;
}

json dense_to_json(const DenseCheckResult& d) {
  return {{"count", d.count},
          {"violation", d.violation},
          {"worst_omega", number_to_json(d.worst_omega)},
          {"worst_phi", d.worst_phi}};
}

std::string summary(const PassivityReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s bands=%zu L=%d K=%ld time=%.3fs",
                r.passive ? "passive" : "non-passive", r.bands.size(), r.subband_count,
                r.total_evaluations, r.wall_time_s);
  return buf;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace

int cmd_check(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PoleResidueModel model = load(spec);
    const ModePreset mode = resolve_preset(spec.mode, spec.overrides);
    for (const auto& w : warp_param_warnings(mode.warp)) err << "warning: " << w << "\n";
    const PassivityReport report = check_passivity(model, mode, verifier_options(spec));

    json doc = report_to_json(report, spec.timing);
    if (spec.oracle) {
      const OracleVerdict v = oracle_verdict(realize(model), model);
      doc["oracle"] = verdict_to_json(v);
      out << "oracle: " << (v.passive ? "passive" : "non-passive")
          << " crossings=" << v.crossings.frequencies.size() << "\n";
    }
    if (spec.dense_count > 0) {
      doc["dense"] = dense_to_json(
          dense_reference_check(model, spec.dense_count, mode.warp, mode.search.gamma));
    }
    if (!spec.report_path.empty()) write_text(spec.report_path, doc.dump(2) + "\n");
    if (!spec.samples_path.empty()) write_text(spec.samples_path, samples_csv(report));
    if (!spec.trace_path.empty()) write_text(spec.trace_path, trace_jsonl(report));
    if (!spec.control_points_path.empty()) {
      write_text(spec.control_points_path,
                 control_points_to_json(build_control_points(model, mode.warp)).dump() + "\n");
    }
    out << summary(report) << "\n";
    return report.passive ? 0 : 1;
  });
}

int cmd_compare(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PoleResidueModel model = load(spec);
    const ModePreset mode = resolve_preset(spec.mode, spec.overrides);
    const long dense = spec.dense_count > 0 ? spec.dense_count : kDenseReferenceCount;
    const Comparison c = compare_model(model, mode, verifier_options(spec), dense);
    if (!spec.report_path.empty()) {
      write_text(spec.report_path, comparison_to_json(c, spec.timing).dump(2) + "\n");
    }
    out << to_string(c.agreement) << " adaptive=" << (c.report.passive ? "passive" : "non-passive")
        << " oracle=" << (c.oracle.passive ? "passive" : "non-passive");
    if (!c.adjudication.empty()) out << " dense-check sides with " << c.adjudication;
    if (c.passive_but_fn) out << " (passive but FN)";
    out << "\n";
    return c.agreement == Agreement::TP ? 0 : 1;
  });
}

int cmd_gen_corpus(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CorpusOptions options;
    options.seed = spec.seed;
    options.count = spec.corpus_count;
    const auto entries = generate_corpus(options);
    write_corpus(spec.out_dir, options, entries);
    out << "wrote " << entries.size() << " models to " << spec.out_dir << "\n";
    return 0;
  });
}

int cmd_dense_check(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PoleResidueModel model = load(spec);
    const ModePreset mode = resolve_preset(spec.mode, spec.overrides);
    const long count = spec.dense_count > 0 ? spec.dense_count : kDenseReferenceCount;
    const DenseCheckResult d = dense_reference_check(model, count, mode.warp, mode.search.gamma);
    const json doc = dense_to_json(d);
    if (!spec.report_path.empty()) write_text(spec.report_path, doc.dump(2) + "\n");
    out << doc.dump() << "\n";
    return d.violation ? 1 : 0;
  });
}

namespace {

void add_model_options(CLI::App* cmd, RunSpec& spec) {
  cmd->add_option("--model", spec.model_path, "model JSON file")->required();
  cmd->add_option("--mode", spec.mode, "soft, hard or final")->capture_default_str();
  cmd->add_flag("--hz", spec.hz, "frequencies in the model file are in Hz");
  cmd->add_option("--report", spec.report_path, "write the JSON report here");
}

void add_overrides(CLI::App* cmd, PresetOverrides& o) {
  cmd->add_option_function<double>("--rho", [&o](const double& v) { o.rho = v; },
                                   "resolution factor (inf disables)");
  cmd->add_option_function<int>("--r-cp", [&o](const int& v) { o.r_cp = v; });
  cmd->add_option_function<int>("--r-rp", [&o](const int& v) { o.r_rp = v; });
  cmd->add_option_function<int>("--r-hf", [&o](const int& v) { o.r_hf = v; });
  cmd->add_option_function<double>("--c", [&o](const double& v) { o.c = v; });
  cmd->add_option_function<double>("--q-max", [&o](const double& v) { o.q_max = v; });
  cmd->add_option_function<int>("--kappa", [&o](const int& v) { o.kappa = v; });
  cmd->add_option_function<double>("--decades", [&o](const double& v) { o.decades = v; });
  cmd->add_option_function<int>("--partition", [&o](const int& v) { o.partition = v; });
  cmd->add_option_function<int>("--h0", [&o](const int& v) { o.initial_level = v; });
  cmd->add_option_function<double>("--delta-zeta", [&o](const double& v) { o.delta_zeta = v; });
  cmd->add_option_function<double>("--delta-theta", [&o](const double& v) { o.delta_theta = v; });
  cmd->add_option_function<double>("--delta-eta", [&o](const double& v) { o.delta_eta = v; });
  cmd->add_option_function<double>("--epsilon", [&o](const double& v) { o.epsilon0 = v; });
  cmd->add_option_function<double>("--epsilon-decay", [&o](const double& v) { o.rho_eps = v; });
  cmd->add_option_function<std::vector<long>>(
         "--budgets", [&o](const std::vector<long>& v) { o.budget_schedule = v; },
         "successive total budgets")
      ->delimiter(',');
  cmd->add_option_function<bool>("--basket-reuse", [&o](const bool& v) { o.basket_reuse = v; });
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Passivity verification of pole-residue macromodels", "passcheck"};
  app.require_subcommand(1);
  RunSpec spec;

  auto* check = app.add_subcommand("check", "adaptive passivity check");
  add_model_options(check, spec);
  add_overrides(check, spec.overrides);
  check->add_option("--samples", spec.samples_path, "write merged samples as CSV");
  check->add_option("--trace", spec.trace_path, "write the search trace as JSON lines");
  check->add_option("--control-points", spec.control_points_path, "write control points as JSON");
  check->add_flag("--oracle", spec.oracle, "also run the Hamiltonian oracle");
  check->add_option("--dense", spec.dense_count, "also run a dense check with this many points");
  check->add_option("--refine-tol", spec.refine_tol)->capture_default_str();
  check->add_option("--workers", spec.workers)->capture_default_str();
  check->add_flag("!--no-timing", spec.timing, "omit timing from the report");

  auto* compare = app.add_subcommand("compare", "adaptive check against the Hamiltonian oracle");
  add_model_options(compare, spec);
  add_overrides(compare, spec.overrides);
  compare->add_option("--dense", spec.dense_count, "points for the dense tiebreak (default 1e6)");
  compare->add_option("--refine-tol", spec.refine_tol)->capture_default_str();
  compare->add_option("--workers", spec.workers)->capture_default_str();
  compare->add_flag("!--no-timing", spec.timing, "omit timing from the report");

  auto* gen = app.add_subcommand("gen-corpus", "generate a random model corpus");
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("--count", spec.corpus_count)->capture_default_str();
  gen->add_option("--out", spec.out_dir, "output directory")->capture_default_str();

  auto* dense = app.add_subcommand("dense-check", "phi on a dense warped grid");
  add_model_options(dense, spec);
  add_overrides(dense, spec.overrides);
  dense->add_option("--count", spec.dense_count, "number of points (default 1e6)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (check->parsed()) return cmd_check(spec, out, err);
  if (compare->parsed()) return cmd_compare(spec, out, err);
  if (gen->parsed()) return cmd_gen_corpus(spec, out, err);
  return cmd_dense_check(spec, out, err);
}

}  // namespace passivity
