// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `acceptance 3 4` runs a subset.

#include "passivity/cli.hpp"
#include "passivity/corpus.hpp"
#include "passivity/hamiltonian.hpp"
#include "passivity/io.hpp"
#include "passivity/mnmso.hpp"
#include "passivity/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace passivity;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<long> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? static_cast<double>(v[n / 2]) : 0.5 * static_cast<double>(v[n / 2 - 1] + v[n / 2]);
}

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = [] {
    CorpusOptions o;
    o.seed = 42;
    o.count = 200;
    return generate_corpus(o);
  }();
  return entries;
}

// Hard-mode comparisons are shared by the oracle and effort criteria.
const std::vector<Comparison>& hard_comparisons() {
  static const std::vector<Comparison> out = [] {
    std::vector<Comparison> c;
    for (const auto& e : corpus()) c.push_back(compare_model(e.model, preset(Mode::Hard)));
    return c;
  }();
  return out;
}

Outcome oracle_agreement() {
  const auto& entries = corpus();
  const auto& cmp = hard_comparisons();
  long tp = 0, fp = 0, fn = 0, passive_but_fn = 0, undetected = 0, dense_runs = 0;
  std::string cases;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& c = cmp[k];
    switch (c.agreement) {
      case Agreement::TP: ++tp; break;
      case Agreement::FP: ++fp; break;
      case Agreement::FN: ++fn; break;
    }
    if (c.agreement != Agreement::TP) {
      cases += " " + entries[k].name + ":" + to_string(c.agreement) + "/" + c.adjudication;
      if (!c.dense) return {false, "disagreement without dense adjudication: " + entries[k].name};
    }
    passive_but_fn += c.passive_but_fn;
    // Every adaptive "passive" verdict is replayed on the dense grid.
    if (c.report.passive) {
      const DenseCheckResult d =
          c.dense ? *c.dense : dense_reference_check(entries[k].model, kDenseReferenceCount);
      ++dense_runs;
      if (d.violation) {
        ++undetected;
        cases += " " + entries[k].name + ":undetected(phi=" + fmt("%.12g", d.worst_phi) + ")";
      }
    }
  }
  const double rate = static_cast<double>(tp) / static_cast<double>(entries.size());
  return {rate >= 0.99 && undetected == 0,
          fmt("TP %ld/%zu (%.1f%%), FP %ld, FN %ld (passive but FN %ld); dense replays %ld, "
              "undetected violations %ld",
              tp, entries.size(), 100 * rate, fp, fn, passive_but_fn, dense_runs, undetected) +
              cases};
}

Outcome crossing_accuracy() {
  const auto& entries = corpus();
  int models = 0;
  long crossings = 0, edges = 0, outside = 0, far_edges = 0;
  double worst_edge = 0.0;
  std::string where;
  for (std::size_t k = 0; k < entries.size() && models < 50; ++k) {
    const auto& m = entries[k].model;
    if (entries[k].intended_passive || m.state_order() > 40) continue;
    const OracleVerdict v = oracle_verdict(realize(m), m);
    if (v.passive || v.crossings.frequencies.empty()) continue;
    ++models;
    const auto r = check_passivity(m, preset(Mode::Hard));
    const auto& cross = v.crossings.frequencies;
    for (double w : cross) {
      ++crossings;
      const bool inside = std::any_of(r.bands.begin(), r.bands.end(), [&](const ViolationBand& b) {
        return b.omega_lo * (1 - 1e-6) <= w && w <= b.omega_hi * (1 + 1e-6);
      });
      if (!inside) {
        ++outside;
        where += " " + entries[k].name + fmt("@%.9g", w);
      }
    }
    for (const auto& b : r.bands) {
      for (double e : {b.omega_lo, b.omega_hi}) {
        if (e == 0.0 || std::isinf(e)) continue;
        ++edges;
        double best = 1e300;
        for (double w : cross) best = std::min(best, rel_err(e, w));
        worst_edge = std::max(worst_edge, best);
        if (best > 1e-6) {
          ++far_edges;
          where += " " + entries[k].name + fmt(":edge %.9g", e);
        }
      }
    }
  }
  return {models == 50 && outside == 0 && far_edges == 0,
          fmt("%d models, %ld crossings (%ld outside bands), %ld refined edges (%ld off), "
              "worst edge error %.2e",
              models, crossings, outside, edges, far_edges, worst_edge) +
              where};
}

PoleResidueModel siso(double residue) {
  PoleResidueModel m;
  m.port_count = 1;
  m.omega_max = 10.0;
  m.direct_term = RealMatrix::Zero(1, 1);
  m.terms.push_back({Complex(-1, 0), ComplexMatrix::Constant(1, 1, residue), false});
  return m;
}

Outcome analytic_siso() {
  bool ok = true;
  std::string detail;
  const auto bad = siso(2.0);
  for (Mode mode : {Mode::Soft, Mode::Hard, Mode::Final}) {
    const auto r = check_passivity(bad, preset(mode));
    const bool this_ok = !r.passive && r.bands.size() == 1 && r.bands[0].omega_lo == 0.0 &&
                         r.bands[0].omega_peak == 0.0 && std::abs(r.bands[0].phi_peak - 2.0) <= 1e-9 &&
                         std::abs(r.bands[0].omega_hi - std::sqrt(3.0)) <= 1e-6;
    ok = ok && this_ok;
    if (!r.bands.empty()) {
      detail += fmt("%s: peak %.15g at %g, edge %.15g; ", to_string(mode).c_str(),
                    r.bands[0].phi_peak, r.bands[0].omega_peak, r.bands[0].omega_hi);
    } else {
      detail += to_string(mode) + ": no band; ";
    }
  }
  const auto crossings = imaginary_crossings(build_problem(realize(bad))).frequencies;
  ok = ok && crossings.size() == 1 && std::abs(crossings[0] - std::sqrt(3.0)) <= 1e-6;
  if (!crossings.empty()) detail += fmt("Hamiltonian crossing %.15g; ", crossings[0]);

  const auto good = siso(0.5);
  for (Mode mode : {Mode::Soft, Mode::Hard, Mode::Final}) {
    const bool passive = check_passivity(good, preset(mode)).passive;
    ok = ok && passive;
    detail += to_string(mode) + (passive ? " passive" : " NOT passive") + " on 0.5/(s+1); ";
  }
  return {ok, detail};
}

Outcome warp_properties() {
  const auto& entries = corpus();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const WarpParams presets[] = {preset(Mode::Soft).warp, preset(Mode::Hard).warp};

  std::vector<WarpMap> maps;
  long integer_misses = 0, control_points = 0;
  for (const auto& e : entries) {
    for (const auto& p : presets) {
      maps.emplace_back(build_control_points(e.model, p));
      const auto& w = maps.back().points();
      for (std::size_t l = 0; l < w.size(); ++l) {
        ++control_points;
        if (maps.back().warp(w[l]) != static_cast<double>(l) || maps.back().unwarp(static_cast<double>(l)) != w[l]) {
          ++integer_misses;
        }
      }
    }
  }

  // Inner subbands uniformly; the last one over one decade past its start.
  auto draw = [&](const WarpMap& map) {
    const auto& w = map.points();
    std::uniform_int_distribution<int> band(0, map.subband_count() - 1);
    const auto l = static_cast<std::size_t>(band(rng));
    const double hi = l + 1 == w.size() - 1 ? 10.0 * w[l] : w[l + 1];
    return w[l] + u(rng) * (hi - w[l]);
  };
  std::uniform_int_distribution<std::size_t> pick(0, maps.size() - 1);
  double worst = 0.0;
  long round_trip_fail = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto& map = maps[pick(rng)];
    const double w = draw(map);
    const double e = rel_err(map.unwarp(map.warp(w)), w);
    worst = std::max(worst, e);
    round_trip_fail += e > 1e-12;
  }
  long monotone_fail = 0, pairs = 0;
  while (pairs < 10000) {
    const auto& map = maps[pick(rng)];
    double a = draw(map);
    double b = draw(map);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    ++pairs;
    monotone_fail += !(map.warp(a) < map.warp(b));
  }
  return {round_trip_fail == 0 && monotone_fail == 0 && integer_misses == 0,
          fmt("round trip: 10000 trials, worst relative error %.2e, %ld above 1e-12; "
              "monotonicity: %ld pairs, %ld violations; control points: %ld checked, %ld not exact",
              worst, round_trip_fail, pairs, monotone_fail, control_points, integer_misses)};
}

bool tiles(const SearchState& s, int m) {
  std::vector<std::pair<double, double>> cells;
  cells.reserve(s.leaves.size());
  for (const auto& leaf : s.leaves) {
    const double c = cell_center(leaf.level, leaf.index, m);
    const double h = 0.5 * cell_width(leaf.level, m);
    cells.emplace_back(c - h, c + h);
  }
  std::sort(cells.begin(), cells.end());
  if (std::abs(cells.front().first) > 1e-12 || std::abs(cells.back().second - 1) > 1e-12) return false;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    if (std::abs(cells[k].first - cells[k - 1].second) > 1e-12) return false;
  }
  return true;
}

Outcome search_bookkeeping() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_u = [&](double lo, double hi) { return std::pow(10.0, lo + (hi - lo) * u(rng)); };
  const int partitions[] = {3, 5, 7, 9};
  long count_fail = 0, tiling_fail = 0, monotone_fail = 0, iterations = 0, distinct_fail = 0;
  for (int run_index = 0; run_index < 1000; ++run_index) {
    SearchConfig c;
    c.partition = partitions[rng() % 4];
    c.initial_level = static_cast<int>(rng() % 3);
    c.delta_zeta = log_u(-10, -4);
    c.delta_theta = log_u(-12, -4);
    c.delta_eta = log_u(-4, -1);
    c.epsilon0 = log_u(-5, -2);
    c.rho_eps = 0.05 + 0.45 * u(rng);
    c.basket_reuse = rng() % 2;
    c.budget_schedule.clear();
    long total = 0;
    const int steps = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < steps; ++k) {
      total += 5 + static_cast<long>(rng() % 60);
      c.budget_schedule.push_back(total);
    }

    // A few Lorentzian bumps around the threshold on a sloped baseline.
    struct Bump {
      double at, width, height;
    };
    std::vector<Bump> bumps;
    const int nb = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < nb; ++k) bumps.push_back({u(rng), log_u(-4, -1), 0.95 + 0.1 * u(rng)});
    const double slope = 0.2 * (u(rng) - 0.5);
    long calls = 0;
    std::set<double> seen;
    const Evaluator f = [&](double z) {
      ++calls;
      seen.insert(z);
      double v = 0.3 + slope * z;
      for (const auto& b : bumps) {
        const double x = (z - b.at) / b.width;
        v = std::max(v, b.height / (1 + x * x));
      }
      return v;
    };
    double last = -1e300;
    bool ok_tiles = true, ok_mono = true, ok_count = true;
    const auto r = run(f, c, [&](const IterationRecord& rec, const SearchState& s) {
      ++iterations;
      ok_tiles = ok_tiles && tiles(s, c.partition);
      ok_mono = ok_mono && rec.theta_max >= last;
      last = rec.theta_max;
      ok_count = ok_count && s.eval_count == calls;
    });
    count_fail += !(ok_count && r.eval_count == calls);
    tiling_fail += !ok_tiles;
    monotone_fail += !ok_mono;
    distinct_fail += static_cast<long>(seen.size()) != calls;
  }
  return {count_fail == 0 && tiling_fail == 0 && monotone_fail == 0 && distinct_fail == 0,
          fmt("1000 configurations, %ld traced iterations; K mismatches %ld, repeated centers %ld, "
              "partition failures %ld, theta_max decreases %ld",
              iterations, count_fail, distinct_fail, tiling_fail, monotone_fail)};
}

Outcome effort_ordering() {
  std::vector<long> soft, hard, fin;
  for (const auto& c : hard_comparisons()) hard.push_back(c.report.total_evaluations);
  for (const auto& e : corpus()) {
    soft.push_back(check_passivity(e.model, preset(Mode::Soft)).total_evaluations);
    fin.push_back(check_passivity(e.model, preset(Mode::Final)).total_evaluations);
  }
  const double ks = median(soft), kh = median(hard), kf = median(fin);
  return {ks <= kh && kh <= kf,
          fmt("median K over %zu models: soft %.1f, hard %.1f, final %.1f", soft.size(), ks, kh, kf)};
}

Outcome narrow_peak() {
  // One resonance with Q = beta / (2 |alpha|) = 1e4 over a broad real pole.
  const double beta = 300.0;
  const double alpha = beta / (2.0 * 1e4);
  PoleResidueModel m;
  m.port_count = 1;
  m.omega_max = 1000.0;
  m.direct_term = RealMatrix::Zero(1, 1);
  m.terms.push_back({Complex(-20.0, 0.0), ComplexMatrix::Constant(1, 1, 10.0), false});
  m.terms.push_back({Complex(-alpha, beta), ComplexMatrix::Constant(1, 1, Complex(alpha, 0.0)), true});

  // Peak located by golden section on the resonance itself.
  auto peak_of = [&](const PoleResidueModel& model) {
    double a = beta - 5 * alpha, b = beta + 5 * alpha;
    const double g = 0.6180339887498949;
    for (int k = 0; k < 200; ++k) {
      const double x1 = b - g * (b - a), x2 = a + g * (b - a);
      if (passivity_metric(model, x1) < passivity_metric(model, x2)) a = x1; else b = x2;
    }
    return passivity_metric(model, 0.5 * (a + b));
  };
  m = scale_model(m, 1.001 / peak_of(m));
  const double peak = peak_of(m);

  const OracleVerdict v = oracle_verdict(realize(m), m);
  double width = 0.0;
  for (const auto& b : v.bands) width += b.omega_hi - b.omega_lo;

  const auto r = check_passivity(m, preset(Mode::Hard));
  const bool detected = std::any_of(r.bands.begin(), r.bands.end(), [&](const ViolationBand& b) {
    return b.omega_lo <= beta && beta <= b.omega_hi;
  });

  // Uniform grid over [0, omega_max] with the same number of evaluations.
  const long k = r.total_evaluations;
  double grid_max = 0.0;
  for (long i = 0; i < k; ++i) {
    const double w = m.omega_max * static_cast<double>(i) / static_cast<double>(k - 1);
    grid_max = std::max(grid_max, passivity_metric(m, w));
  }
  const bool grid_misses = grid_max <= 1.0;
  return {detected && grid_misses && !v.passive,
          fmt("peak phi %.9g, violation width %.3e rad/s (%.2e relative, resonance bandwidth %.0e); "
              "hard mode %s with K=%ld; uniform grid of %ld points max phi %.6f (%s)",
              peak, width, width / beta, 2 * alpha / beta, detected ? "detects it" : "MISSES it", k, k,
              grid_max, grid_misses ? "misses it" : "finds it")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "passivity_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto& entries = corpus();
  long compared = 0, differing = 0;
  for (std::size_t k : {0u, 3u, 42u, 117u, 199u}) {
    const fs::path model = dir / (entries[k].name + ".json");
    write_text(model, model_to_json(entries[k].model).dump(2));
    for (const char* mode : {"soft", "hard", "final"}) {
      std::string outputs[2][3];
      for (int rep = 0; rep < 2; ++rep) {
        const std::string tag = entries[k].name + "_" + mode + "_" + std::to_string(rep);
        const fs::path report = dir / (tag + ".json"), csv = dir / (tag + ".csv"), trace = dir / (tag + ".jsonl");
        const std::string args[] = {"passcheck", "check", "--model", model.string(), "--mode", mode,
                                    "--report", report.string(), "--samples", csv.string(),
                                    "--trace", trace.string(), "--no-timing"};
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        outputs[rep][0] = slurp(report);
        outputs[rep][1] = slurp(csv);
        outputs[rep][2] = slurp(trace);
      }
      for (int f = 0; f < 3; ++f) {
        ++compared;
        differing += outputs[0][f] != outputs[1][f] || outputs[0][f].empty();
      }
    }
  }
  return {differing == 0,
          fmt("%ld report/CSV/trace pairs compared byte for byte, %ld differ", compared, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"oracle agreement", oracle_agreement}},
      {2, {"crossing accuracy", crossing_accuracy}},
      {3, {"analytic SISO fixture", analytic_siso}},
      {4, {"warp properties", warp_properties}},
      {5, {"search bookkeeping", search_bookkeeping}},
      {6, {"effort ordering", effort_ordering}},
      {7, {"narrow-peak detection", narrow_peak}},
      {8, {"determinism", determinism}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [id, c] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", id, c.first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
