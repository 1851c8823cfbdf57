#include "passivity/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace passivity {

ModePreset preset(Mode mode) {
  ModePreset out;
  out.name = to_string(mode);
  switch (mode) {
    case Mode::Soft:
      out.warp = WarpParams{1e3, 1, 2, 5, 50.0, 500.0, 3, 0.5};
      out.search.partition = 5;
      out.search.delta_eta = 1e-3;
      out.search.epsilon0 = 1e-3;
      out.search.budget_schedule = {7, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
      break;
    case Mode::Hard:
      out.warp = WarpParams{kInfinity, 3, 3, 6, 50.0, 500.0, 3, 0.5};
      out.search.partition = 5;
      out.search.delta_eta = 1e-2;
      out.search.epsilon0 = 1e-3;
      out.search.budget_schedule = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
      break;
    case Mode::Final:
      out.warp = WarpParams{kInfinity, 3, 3, 6, 50.0, 500.0, 3, 0.5};
      out.search.partition = 3;
      out.search.delta_eta = 1e-3;
      out.search.epsilon0 = 1e-4;
      out.search.budget_schedule = {50, 100, 150, 200, 250};
      out.search.basket_reuse = true;
      break;
  }
  out.search.initial_level = 1;
  out.search.delta_zeta = 1e-8;
  out.search.delta_theta = 1e-8;
  out.search.rho_eps = 0.1;
  return out;
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "soft") return Mode::Soft;
  if (name == "hard") return Mode::Hard;
  if (name == "final") return Mode::Final;
  return std::nullopt;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Soft: return "soft";
    case Mode::Hard: return "hard";
    case Mode::Final: return "final";
  }
  return "unknown";
}

namespace {

// First index of the plateau containing i and one past its end.
std::pair<std::size_t, std::size_t> plateau(std::span<const Sample> s, std::size_t i) {
  std::size_t lo = i;
  while (lo > 0 && s[lo - 1].phi == s[i].phi) --lo;
  std::size_t hi = i + 1;
  while (hi < s.size() && s[hi].phi == s[i].phi) ++hi;
  return {lo, hi};
}

bool is_leftmost_local_max(std::span<const Sample> s, std::size_t i) {
  const auto [lo, hi] = plateau(s, i);
  if (lo != i) return false;
  const bool left = lo == 0 || s[lo - 1].phi < s[i].phi;
  const bool right = hi == s.size() || s[hi].phi < s[i].phi;
  return left && right;
}

double checked(const MetricFn& metric, double omega) {
  const double phi = metric(omega);
  if (!std::isfinite(phi)) {
    std::ostringstream os;
    os << "metric evaluation failed at omega = " << omega;
    throw EvaluationError(os.str(), omega);
  }
  return phi;
}

// Bisects the threshold crossing between a non-violating and a violating
// frequency. Returns whichever final bracket end is closer to gamma.
double bisect_crossing(double passive_omega, double violating_omega, const MetricFn& metric,
                       const WarpMap& warp, double gamma, double tol, long& evaluations) {
  double a = passive_omega;
  double b = violating_omega;
  double phi_a = gamma;  // only used for the final pick
  double phi_b = gamma;
  bool have_a = false;
  bool have_b = false;
  for (int iter = 0; iter < 400; ++iter) {
    double mid;
    if (std::isinf(a) || std::isinf(b)) {
      mid = warp.unwarp(0.5 * (warp.warp(a) + warp.warp(b)));
    } else {
      mid = 0.5 * (a + b);
    }
    if (mid == a || mid == b) break;
    const double phi = checked(metric, mid);
    ++evaluations;
    if (phi > gamma) {
      b = mid;
      phi_b = phi;
      have_b = true;
    } else {
      a = mid;
      phi_a = phi;
      have_a = true;
    }
    if (std::isinf(a) || std::isinf(b)) continue;
    const double width = std::abs(b - a);
    const double scale = std::max(std::abs(a), std::abs(b));
    const double miss = std::min(have_a ? gamma - phi_a : kInfinity, have_b ? phi_b - gamma : kInfinity);
    if (width <= tol * scale && miss <= tol) break;
  }
  if (!have_a) return b;
  if (!have_b) return a;
  return (gamma - phi_a) <= (phi_b - gamma) ? a : b;
}

}  // namespace

EdgeMaxima postprocess_edge_maxima(std::span<const Sample> merged, double gamma) {
  EdgeMaxima out;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (merged[i].phi > gamma && is_leftmost_local_max(merged, i)) out.retained.push_back(i);
  }

  // Maxima of each subband's own samples; those not retained globally were
  // artefacts of the subband boundary.
  std::map<int, std::vector<Sample>> groups;
  for (const auto& s : merged) groups[s.subband].push_back(s);
  long local = 0;
  for (const auto& [band, samples] : groups) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].phi > gamma && is_leftmost_local_max(samples, i)) ++local;
    }
  }
  out.dropped = std::max(0L, local - static_cast<long>(out.retained.size()));
  return out;
}

std::vector<ViolationBand> extract_bands(std::span<const Sample> merged,
                                         std::span<const std::size_t> maxima,
                                         const MetricFn& metric, const WarpMap& warp, double gamma,
                                         double refine_tol, long* evaluations) {
  struct Range {
    std::optional<std::size_t> left;   // last non-violating sample before the peak
    std::optional<std::size_t> right;  // first non-violating sample after it
    std::size_t peak;
  };
  std::vector<Range> ranges;
  for (std::size_t m : maxima) {
    Range r{std::nullopt, std::nullopt, m};
    for (std::size_t k = m; k-- > 0;) {
      if (!(merged[k].phi > gamma)) {
        r.left = k;
        break;
      }
    }
    for (std::size_t k = m + 1; k < merged.size(); ++k) {
      if (!(merged[k].phi > gamma)) {
        r.right = k;
        break;
      }
    }
    if (!ranges.empty() && ranges.back().left == r.left && ranges.back().right == r.right) {
      if (merged[m].phi > merged[ranges.back().peak].phi) ranges.back().peak = m;
      continue;
    }
    ranges.push_back(r);
  }

  long count = 0;
  std::vector<ViolationBand> bands;
  for (const auto& r : ranges) {
    ViolationBand band;
    band.omega_peak = merged[r.peak].omega;
    band.phi_peak = merged[r.peak].phi;
    band.omega_lo = r.left ? bisect_crossing(merged[*r.left].omega, merged[*r.left + 1].omega,
                                             metric, warp, gamma, refine_tol, count)
                           : merged.front().omega;
    band.omega_hi = r.right ? bisect_crossing(merged[*r.right].omega, merged[*r.right - 1].omega,
                                              metric, warp, gamma, refine_tol, count)
                            : merged.back().omega;
    bands.push_back(band);
  }
  if (evaluations) *evaluations += count;
  return bands;
}

PassivityReport check_passivity(const PoleResidueModel& model, const ModePreset& mode,
                                 const VerifierOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  require_valid(model);
  check_search_config(mode.search);

  const MetricFn metric =
      options.metric ? options.metric : [&model](double w) { return passivity_metric(model, w); };
  const double gamma = mode.search.gamma;

  const WarpMap warp(build_control_points(model, mode.warp));
  const int subbands = warp.subband_count();
  const auto& points = warp.points();

  PassivityReport report;
  report.mode = mode.name;
  report.gamma = gamma;
  report.subband_count = subbands;
  report.control_points = points;
  report.subband_evaluations.assign(static_cast<std::size_t>(subbands), 0);
  if (options.collect_trace) report.trace.resize(static_cast<std::size_t>(subbands));

  std::vector<SubbandResult> results(static_cast<std::size_t>(subbands));
  std::vector<double> failed_at(static_cast<std::size_t>(subbands), kInfinity);
  auto search_subband = [&](int l) {
    const auto ul = static_cast<std::size_t>(l);
    Evaluator theta = [&, l, ul](double t) {
      const double omega = warp.unwarp_local(l, t);
      try {
        return checked(metric, omega);
      } catch (const EvaluationError&) {
        failed_at[ul] = omega;
        throw;
      }
    };
    SearchObserver observer;
    if (options.collect_trace) {
      observer = [&report, ul](const IterationRecord& rec, const SearchState&) {
        report.trace[ul].push_back(rec);
      };
    }
    results[ul] = run(theta, mode.search, observer);
  };

  const int workers = std::clamp(options.workers, 1, std::max(1, subbands));
  if (workers == 1) {
    for (int l = 0; l < subbands; ++l) search_subband(l);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int l = w; l < subbands; l += workers) search_subband(l);
      });
    }
  }

  std::vector<Sample> merged;
  for (int l = 0; l <= subbands; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const int owner = std::min(l, subbands - 1);
    merged.push_back({points[ul], static_cast<double>(l), checked(metric, points[ul]), owner, true});
    ++report.subband_evaluations[static_cast<std::size_t>(owner)];
  }
  for (int l = 0; l < subbands; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const auto& res = results[ul];
    if (!res.valid) {
      throw EvaluationError("subband " + std::to_string(l) + ": " + res.error, failed_at[ul]);
    }
    report.subband_evaluations[ul] += res.eval_count;
    for (const auto& s : res.samples) {
      merged.push_back({warp.unwarp_local(l, s.zeta), l + s.zeta, s.theta, l, false});
    }
  }
  for (long k : report.subband_evaluations) report.total_evaluations += k;

  std::stable_sort(merged.begin(), merged.end(), [](const Sample& a, const Sample& b) {
    if (a.omega != b.omega) return a.omega < b.omega;
    return a.control_point && !b.control_point;
  });
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const Sample& a, const Sample& b) { return a.omega == b.omega; }),
               merged.end());

  for (const auto& s : merged) {
    if (s.phi > gamma) ++report.violation_samples;
  }
  const EdgeMaxima maxima = postprocess_edge_maxima(merged, gamma);
  report.retained_maxima = static_cast<long>(maxima.retained.size());
  report.dropped_edge_maxima = maxima.dropped;
  report.bands = extract_bands(merged, maxima.retained, metric, warp, gamma, options.refine_tol,
                               &report.refine_evaluations);
  report.passive = report.bands.empty();
  report.samples = std::move(merged);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

DenseCheckResult dense_reference_check(const PoleResidueModel& model, long count,
                                       const WarpParams& warp_params, double gamma) {
  if (count < 1) throw std::invalid_argument("dense check: count must be at least 1");
  const WarpMap warp(build_control_points(model, warp_params));
  const double span = warp.subband_count();
  DenseCheckResult out;
  out.count = count;
  out.worst_phi = -kInfinity;
  for (long k = 0; k < count; ++k) {
    const double zeta = (static_cast<double>(k) + 0.5) * span / static_cast<double>(count);
    const double omega = warp.unwarp(zeta);
    const double phi = passivity_metric(model, omega);
    if (phi > out.worst_phi) {
      out.worst_phi = phi;
      out.worst_omega = omega;
    }
  }
  out.violation = out.worst_phi > gamma;
  return out;
}

}  // namespace passivity
