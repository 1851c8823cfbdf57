#include "passivity/corpus.hpp"

#include "passivity/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace passivity {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log10(lo), std::log10(hi));
  return std::pow(10.0, u(rng));
}

RealMatrix symmetric_uniform(std::mt19937_64& rng, int p, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  RealMatrix m(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) m(i, j) = m(j, i) = u(rng);
  }
  return m;
}

// Dense warp used only to locate the maximum; finer than any preset.
const WarpParams kSweepWarp{kInfinity, 8, 8, 8, 50.0, 500.0, 3, 0.5};

double golden_max(const std::function<double(double)>& f, double a, double b, double& best) {
  constexpr double g = 0.6180339887498949;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int k = 0; k < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++k) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  best = std::max(f1, f2);
  return f1 >= f2 ? x1 : x2;
}

}  // namespace

PoleResidueModel random_model(std::mt19937_64& rng, int ports, int order) {
  PoleResidueModel model;
  model.port_count = ports;
  std::bernoulli_distribution pick_pair(0.7);
  double top = 0.0;
  for (int remaining = order; remaining > 0;) {
    const double w0 = log_uniform(rng, 1.0, 1e3);
    top = std::max(top, w0);
    PoleTerm term;
    if (remaining >= 2 && pick_pair(rng)) {
      const double damping = log_uniform(rng, 1e-4, 1.0);
      term.pole = {-damping * w0, w0 * std::sqrt(1.0 - damping * damping)};
      term.is_pair = true;
      const double a = std::abs(term.pole.real());
      const RealMatrix re = symmetric_uniform(rng, ports, 1.0);
      const RealMatrix im = symmetric_uniform(rng, ports, 1.0);
      term.residue = a * (re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>());
      remaining -= 2;
    } else {
      term.pole = {-w0, 0.0};
      term.residue = (w0 * symmetric_uniform(rng, ports, 1.0)).cast<Complex>();
      remaining -= 1;
    }
    model.terms.push_back(std::move(term));
  }
  model.omega_max = 1.25 * top;
  model.direct_term = symmetric_uniform(rng, ports, 0.5);
  return model;
}

MetricPeak max_metric(const PoleResidueModel& model, int points_per_subband) {
  const WarpMap warp(build_control_points(model, kSweepWarp));
  const int subbands = warp.subband_count();
  const long count = static_cast<long>(subbands) * points_per_subband;
  auto phi_at = [&](double zeta) { return passivity_metric(model, warp.unwarp(zeta)); };

  std::vector<double> zeta(static_cast<std::size_t>(count) + 1);
  std::vector<double> phi(zeta.size());
  for (long k = 0; k <= count; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    zeta[uk] = static_cast<double>(subbands) * static_cast<double>(k) / static_cast<double>(count);
    phi[uk] = phi_at(zeta[uk]);
  }

  MetricPeak best{0.0, phi.front()};
  if (phi.back() > best.phi) best = {kInfinity, phi.back()};
  const double sweep_max = *std::max_element(phi.begin(), phi.end());

  std::vector<std::size_t> local;
  for (std::size_t k = 1; k + 1 < phi.size(); ++k) {
    if (phi[k] >= phi[k - 1] && phi[k] >= phi[k + 1] && phi[k] >= 0.5 * sweep_max) local.push_back(k);
  }
  std::sort(local.begin(), local.end(), [&](std::size_t a, std::size_t b) { return phi[a] > phi[b]; });
  if (local.size() > 24) local.resize(24);
  for (std::size_t k : local) {
    double value = 0.0;
    double z = golden_max(phi_at, zeta[k - 1], zeta[k + 1], value);
    if (phi[k] > value) {
      value = phi[k];
      z = zeta[k];
    }
    if (value > best.phi) best = {warp.unwarp(z), value};
  }
  return best;
}

std::vector<CorpusEntry> generate_corpus(const CorpusOptions& options) {
  if (options.ports.empty() || options.targets.empty() || options.min_order < 1 ||
      options.max_order < options.min_order) {
    throw std::invalid_argument("corpus: empty port set, target set or order range");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> port_pick(0, options.ports.size() - 1);
  std::uniform_int_distribution<int> order_pick(options.min_order, options.max_order);

  std::vector<CorpusEntry> out;
  for (int k = 0; k < options.count; ++k) {
    const int ports = options.ports[port_pick(rng)];
    const int order = order_pick(rng);
    const PoleResidueModel raw = random_model(rng, ports, order);

    CorpusEntry entry;
    char name[32];
    std::snprintf(name, sizeof name, "model_%03d", k);
    entry.name = name;
    entry.target = options.targets[static_cast<std::size_t>(k) % options.targets.size()];
    const MetricPeak raw_peak = max_metric(raw);
    entry.scale = raw_peak.phi > 0.0 ? entry.target / raw_peak.phi : 0.0;
    entry.model = scale_model(raw, entry.scale);
    entry.peak = {raw_peak.omega, passivity_metric(entry.model, raw_peak.omega)};
    entry.intended_passive = entry.target <= 1.0;
    out.push_back(std::move(entry));
  }
  return out;
}

nlohmann::json corpus_manifest(const CorpusOptions& options, const std::vector<CorpusEntry>& entries) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) {
    list.push_back({{"name", e.name},
                    {"file", e.name + ".json"},
                    {"ports", e.model.port_count},
                    {"order", e.model.pole_term_count()},
                    {"target", e.target},
                    {"scale", e.scale},
                    {"max_phi", e.peak.phi},
                    {"omega_at_max", number_to_json(e.peak.omega)},
                    {"intended_passive", e.intended_passive}});
  }
  return {{"seed", options.seed}, {"count", options.count}, {"targets", options.targets},
          {"models", list}};
}

void write_corpus(const std::filesystem::path& dir, const CorpusOptions& options,
                  const std::vector<CorpusEntry>& entries) {
  std::filesystem::create_directories(dir);
  for (const auto& e : entries) {
    write_text(dir / (e.name + ".json"), model_to_json(e.model).dump(2) + "\n");
  }
  write_text(dir / "manifest.json", corpus_manifest(options, entries).dump(2) + "\n");
}

}  // namespace passivity
