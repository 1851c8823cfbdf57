#pragma once

#include "passivity/hamiltonian.hpp"
#include "passivity/io.hpp"
#include "passivity/verifier.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace passivity {

/// Per-field overrides on top of a mode preset.
struct PresetOverrides {
  std::optional<double> rho;
  std::optional<int> r_cp, r_rp, r_hf;
  std::optional<double> c, q_max;
  std::optional<int> kappa;
  std::optional<double> decades;
  std::optional<int> partition, initial_level;
  std::optional<double> delta_zeta, delta_theta, delta_eta, epsilon0, rho_eps;
  std::optional<std::vector<long>> budget_schedule;
  std::optional<bool> basket_reuse;
};

struct RunSpec {
  std::string model_path;
  std::string mode = "hard";
  PresetOverrides overrides;
  std::string report_path;
  std::string samples_path;
  std::string trace_path;
  std::string control_points_path;
  bool oracle = false;
  long dense_count = 0;  // 0 disables the dense check in `check`
  bool hz = false;
  bool timing = true;
  double refine_tol = 1e-9;
  int workers = 1;
  // gen-corpus
  std::uint64_t seed = 42;
  int corpus_count = 200;
  std::string out_dir = "corpus";
};

inline constexpr long kDenseReferenceCount = 1000000;

/// Caps a requested worker count by PASSCHECK_MAX_WORKERS and the hardware.
int effective_workers(int requested);

ModePreset resolve_preset(const std::string& mode, const PresetOverrides& overrides);

enum class Agreement { TP, FP, FN };
std::string to_string(Agreement a);

/// Adaptive check against the Hamiltonian oracle. FP: adaptive passive,
/// oracle not; FN: oracle passive, adaptive not. Disagreements are settled
/// by the dense reference check.
struct Comparison {
  Agreement agreement = Agreement::TP;
  PassivityReport report;
  OracleVerdict oracle;
  std::optional<DenseCheckResult> dense;
  /// FN where the dense check confirms a violation the oracle missed.
  bool passive_but_fn = false;
  /// Which side the dense check sided with, empty for TP.
  std::string adjudication;
};

Comparison compare_model(const PoleResidueModel& model, const ModePreset& preset,
                         const VerifierOptions& options = {}, long dense_count = kDenseReferenceCount,
                         const OracleOptions& oracle_options = {});

nlohmann::json comparison_to_json(const Comparison& c, bool with_timing = true);

// Exit codes: 0 passive / agreement, 1 non-passive / disagreement, 2 error.
int cmd_check(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_compare(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_gen_corpus(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_dense_check(const RunSpec& spec, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace passivity
