#include "passivity/mnmso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace passivity {

namespace {

// Centers are computed exactly while M^h stays below this bound.
constexpr double kIndexLimit = 4503599627370496.0;  // 2^52

std::uint64_t ipow(int base, int exponent) {
  std::uint64_t out = 1;
  for (int k = 0; k < exponent; ++k) out *= static_cast<std::uint64_t>(base);
  return out;
}

// Deepest level the search can reach: the first h whose children satisfy S1.
int deepest_level(const SearchConfig& config) {
  int h = 0;
  while (!(cell_width(h + 1, config.partition) < config.delta_zeta)) ++h;
  return h + 1;
}

}  // namespace

double cell_width(int level, int partition) {
  return 1.0 / static_cast<double>(ipow(partition, level));
}

double cell_center(int level, std::uint64_t index, int partition) {
  // (2i + 1) / (2 M^h): one rounding, so a relabeled middle child lands on
  // exactly the same double as its parent.
  return static_cast<double>(2 * index + 1) / (2.0 * static_cast<double>(ipow(partition, level)));
}

void check_search_config(const SearchConfig& config) {
  if (config.partition < 3 || config.partition % 2 == 0) {
    throw std::invalid_argument("search: partition factor M must be odd and >= 3");
  }
  if (config.initial_level < 0) throw std::invalid_argument("search: h0 must be >= 0");
  if (!(config.delta_zeta > 0.0) || !(config.delta_theta > 0.0) || !(config.delta_eta > 0.0) ||
      !(config.epsilon0 > 0.0)) {
    throw std::invalid_argument("search: tolerances must be positive");
  }
  if (!(config.rho_eps > 0.0 && config.rho_eps < 1.0)) {
    throw std::invalid_argument("search: epsilon decay must lie in (0, 1)");
  }
  if (config.budget_schedule.empty()) throw std::invalid_argument("search: empty budget schedule");
  for (std::size_t k = 1; k < config.budget_schedule.size(); ++k) {
    if (config.budget_schedule[k] <= config.budget_schedule[k - 1]) {
      throw std::invalid_argument("search: budget schedule must be strictly increasing");
    }
  }
  if (config.budget_schedule.front() < 1) throw std::invalid_argument("search: budgets must be >= 1");
  if (static_cast<double>(ipow(config.partition, config.initial_level)) > 1e6) {
    throw std::invalid_argument("search: initial level too deep");
  }
  if (config.delta_zeta < 1e-15 ||
      std::pow(static_cast<double>(config.partition), deepest_level(config)) >= kIndexLimit) {
    throw std::invalid_argument("search: resolution stop too fine for exact cell indexing");
  }
}

int SearchState::min_level() const {
  int out = std::numeric_limits<int>::max();
  for (const auto& leaf : leaves) out = std::min(out, leaf.level);
  return out;
}

int SearchState::max_level() const {
  int out = 0;
  for (const auto& leaf : leaves) out = std::max(out, leaf.level);
  return out;
}

std::size_t SearchState::candidate_count() const {
  return static_cast<std::size_t>(std::count_if(leaves.begin(), leaves.end(), [](const Leaf& l) {
    return l.status == LeafStatus::Candidate;
  }));
}

SearchState initialize(const SearchConfig& config, const Evaluator& f) {
  check_search_config(config);
  SearchState state;
  state.level = config.initial_level;
  state.budget = config.budget_schedule.front();
  state.epsilon = config.epsilon0;

  const std::uint64_t count = ipow(config.partition, config.initial_level);
  state.leaves.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double zeta = cell_center(config.initial_level, i, config.partition);
    const double value = f(zeta);
    state.leaves.push_back({config.initial_level, i, value, LeafStatus::Candidate});
    if (value > state.theta_max) {
      state.theta_max = value;
      state.zeta_at_max = zeta;
    }
  }
  state.eval_count = static_cast<long>(count);
  return state;
}

std::optional<std::size_t> select_current(SearchState& state, int /*partition*/) {
  bool level_present = false;
  int lowest = std::numeric_limits<int>::max();
  for (const auto& leaf : state.leaves) {
    if (leaf.status != LeafStatus::Candidate) continue;
    lowest = std::min(lowest, leaf.level);
    if (leaf.level == state.level) level_present = true;
  }
  if (lowest == std::numeric_limits<int>::max()) return std::nullopt;
  if (!level_present) state.level = lowest;

  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < state.leaves.size(); ++k) {
    const auto& leaf = state.leaves[k];
    if (leaf.status != LeafStatus::Candidate || leaf.level != state.level) continue;
    if (!best) {
      best = k;
      continue;
    }
    const auto& incumbent = state.leaves[*best];
    if (leaf.value > incumbent.value ||
        (leaf.value == incumbent.value && leaf.index < incumbent.index)) {
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> expand(SearchState& state, std::size_t leaf, int partition,
                                const Evaluator& f) {
  const Leaf parent = state.leaves.at(leaf);
  const int child_level = parent.level + 1;
  const std::uint64_t first = parent.index * static_cast<std::uint64_t>(partition);
  const int middle = partition / 2;

  // All evaluations happen before the state is touched.
  std::vector<double> values(static_cast<std::size_t>(partition));
  for (int j = 0; j < partition; ++j) {
    values[static_cast<std::size_t>(j)] =
        j == middle ? parent.value : f(cell_center(child_level, first + static_cast<std::uint64_t>(j), partition));
  }

  std::vector<std::size_t> positions(static_cast<std::size_t>(partition));
  for (int j = 0; j < partition; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    Leaf child{child_level, first + static_cast<std::uint64_t>(j), values[uj], LeafStatus::Candidate};
    if (j == middle) {
      state.leaves[leaf] = child;  // relabel in place
      positions[uj] = leaf;
    } else {
      positions[uj] = state.leaves.size();
      state.leaves.push_back(child);
      if (child.value > state.theta_max) {
        state.theta_max = child.value;
        state.zeta_at_max = cell_center(child_level, child.index, partition);
      }
    }
  }
  state.eval_count += partition - 1;
  return positions;
}

namespace {

double max_adjacent_gap(std::span<const double> children) {
  double gap = 0.0;
  for (std::size_t j = 0; j + 1 < children.size(); ++j) {
    gap = std::max(gap, std::abs(children[j + 1] - children[j]));
  }
  return gap;
}

}  // namespace

StopFlags stop_conditions(const SearchConfig& config, int level,
                          std::span<const double> children) {
  const double child_width = cell_width(level + 1, config.partition);
  const double gap = max_adjacent_gap(children);
  const double peak = *std::max_element(children.begin(), children.end());
  StopFlags flags;
  flags.s1 = child_width < config.delta_zeta;
  flags.s2 = gap < config.delta_theta;
  flags.s3 = child_width < config.delta_eta && gap < std::abs(peak - config.gamma);
  return flags;
}

BudgetFlags budget_conditions(const SearchConfig& config, double epsilon, int level,
                              std::span<const double> children) {
  const double child_width = cell_width(level + 1, config.partition);
  const double gap = max_adjacent_gap(children);
  const double peak = *std::max_element(children.begin(), children.end());
  BudgetFlags flags;
  flags.u1 = peak < config.gamma;
  flags.u2 = (config.gamma - peak) / peak < epsilon;
  flags.u3 = child_width < config.delta_eta && std::abs(config.gamma - peak) < gap;
  return flags;
}

SubbandResult run(const Evaluator& f, const SearchConfig& config, const SearchObserver& observer) {
  check_search_config(config);
  SubbandResult result;
  SearchState state;
  const int m = config.partition;

  try {
    state = initialize(config, f);
  } catch (const std::exception& e) {
    result.valid = false;
    result.error = e.what();
    return result;
  }

  std::vector<double> values(static_cast<std::size_t>(m));
  while (true) {
    const auto current = select_current(state, m);
    if (!current) break;

    IterationRecord record;
    record.iteration = state.iteration;
    record.level = state.level;
    record.expanded_index = state.leaves[*current].index;

    std::vector<std::size_t> children;
    try {
      children = expand(state, *current, m, f);
    } catch (const std::exception& e) {
      result.valid = false;
      result.error = e.what();
      break;
    }
    for (std::size_t j = 0; j < children.size(); ++j) values[j] = state.leaves[children[j]].value;

    const int h = record.level;
    record.stop = stop_conditions(config, h, values);
    record.budget_flags = budget_conditions(config, state.epsilon, h, values);

    bool finished = false;
    if (state.eval_count > state.budget) {
      record.budget_exceeded = true;
      if (record.budget_flags.trigger() && state.budget_step + 1 < config.budget_schedule.size()) {
        ++state.budget_step;
        state.budget = config.budget_schedule[state.budget_step];
        state.epsilon *= config.rho_eps;
        record.budget_advanced = true;
      } else {
        record.returned_on_budget = true;
        finished = true;
      }
    }

    if (!finished) {
      if (record.stop.any()) {
        for (auto k : children) state.leaves[k].status = LeafStatus::Basket;
        state.level = state.min_level();
        state.epsilon = config.epsilon0;
        if (config.basket_reuse) {
          // Leaves already at the target resolution stay frozen.
          for (auto& leaf : state.leaves) {
            if (leaf.status == LeafStatus::Basket &&
                !(cell_width(leaf.level, m) < config.delta_zeta)) {
              leaf.status = LeafStatus::Candidate;
            }
          }
        }
      } else {
        state.level = h + 1;
      }
      ++state.iteration;
    }

    record.eval_count = state.eval_count;
    record.budget = state.budget;
    record.epsilon = state.epsilon;
    record.theta_max = state.theta_max;
    if (observer) observer(record, state);
    if (finished) break;
  }

  result.samples.reserve(state.leaves.size());
  for (const auto& leaf : state.leaves) {
    result.samples.push_back({cell_center(leaf.level, leaf.index, m), leaf.value});
  }
  std::sort(result.samples.begin(), result.samples.end(),
            [](const SubbandSample& a, const SubbandSample& b) { return a.zeta < b.zeta; });
  result.theta_max = state.theta_max;
  result.zeta_at_max = state.zeta_at_max;
  result.eval_count = state.eval_count;
  result.iterations = state.iteration;
  return result;
}

}  // namespace passivity
