#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace passivity {

/// Modified multi-scale search over [0, 1]. Budgets in `budget_schedule` are
/// successive totals; the search is allowed to pass each one only while the
/// budget trigger holds.
struct SearchConfig {
  int partition = 5;          // M, odd, >= 3
  int initial_level = 1;      // h0
  double delta_zeta = 1e-8;   // resolution stop
  double delta_theta = 1e-8;  // variation stop
  double delta_eta = 1e-3;    // minimum resolution gating S3 and U3
  double epsilon0 = 1e-3;     // relative closeness to the threshold
  double rho_eps = 0.1;       // epsilon decay per budget step
  std::vector<long> budget_schedule{7, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  bool basket_reuse = false;
  double gamma = 1.0;
};

/// Throws std::invalid_argument when the configuration cannot be run.
void check_search_config(const SearchConfig& config);

enum class LeafStatus { Candidate, Basket };

struct Leaf {
  int level = 0;
  std::uint64_t index = 0;
  double value = 0.0;
  LeafStatus status = LeafStatus::Candidate;
};

/// (i + 1/2) M^-h.
double cell_center(int level, std::uint64_t index, int partition);
/// M^-h.
double cell_width(int level, int partition);

struct SearchState {
  std::vector<Leaf> leaves;  // E = C u B
  int level = 0;             // current level h
  long eval_count = 0;       // K
  long budget = 0;           // current n^e
  std::size_t budget_step = 0;
  double epsilon = 0.0;
  double theta_max = -std::numeric_limits<double>::infinity();
  double zeta_at_max = 0.0;
  long iteration = 0;        // mu

  int min_level() const;
  int max_level() const;
  std::size_t candidate_count() const;
};

using Evaluator = std::function<double(double)>;

SearchState initialize(const SearchConfig& config, const Evaluator& f);

/// Index into state.leaves of the best candidate at the current level,
/// smallest cell index on ties. Drops the current level to the smallest
/// level present in C when level h holds no candidate. nullopt iff C is empty.
std::optional<std::size_t> select_current(SearchState& state, int partition);

/// Refines leaves[leaf] into its M children. The middle child keeps the
/// parent's value; M-1 evaluations are made. Returns the children's
/// positions in state.leaves, in cell-index order. On evaluator failure the
/// state is left untouched.
std::vector<std::size_t> expand(SearchState& state, std::size_t leaf, int partition,
                                const Evaluator& f);

struct StopFlags {
  bool s1 = false;
  bool s2 = false;
  bool s3 = false;
  bool any() const { return s1 || s2 || s3; }
};

struct BudgetFlags {
  bool u1 = false;
  bool u2 = false;
  bool u3 = false;
  bool trigger() const { return u1 && (u2 || u3); }
};

/// `level` is the parent level h; `children` the M values in index order.
StopFlags stop_conditions(const SearchConfig& config, int level, std::span<const double> children);
BudgetFlags budget_conditions(const SearchConfig& config, double epsilon, int level,
                              std::span<const double> children);

struct IterationRecord {
  long iteration = 0;
  int level = 0;
  std::uint64_t expanded_index = 0;
  StopFlags stop;
  BudgetFlags budget_flags;
  bool budget_exceeded = false;
  bool budget_advanced = false;
  bool returned_on_budget = false;
  long eval_count = 0;
  long budget = 0;
  double epsilon = 0.0;
  double theta_max = 0.0;
};

/// Called after every iteration with the record and the updated state.
using SearchObserver = std::function<void(const IterationRecord&, const SearchState&)>;

struct SubbandSample {
  double zeta = 0.0;
  double theta = 0.0;
};

struct SubbandResult {
  std::vector<SubbandSample> samples;  // sorted by zeta
  double theta_max = 0.0;
  double zeta_at_max = 0.0;
  long eval_count = 0;
  long iterations = 0;
  bool valid = true;
  std::string error;
};

SubbandResult run(const Evaluator& f, const SearchConfig& config,
                  const SearchObserver& observer = {});

}  // namespace passivity
