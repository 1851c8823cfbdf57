#pragma once

#include "passivity/model.hpp"
#include "passivity/warp.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace passivity {

/// Random stable model: natural frequencies log-uniform over three decades,
/// damping log-uniform in [1e-4, 1], symmetric residues proportional to the
/// pole's real part, random symmetric direct term. `order` counts a pair as
/// two poles.
PoleResidueModel random_model(std::mt19937_64& rng, int ports, int order);

struct MetricPeak {
  double omega = 0.0;
  double phi = 0.0;
};

/// Global maximum of phi: a dense sweep uniform in the warped coordinate,
/// then golden-section refinement around the leading local maxima.
MetricPeak max_metric(const PoleResidueModel& model, int points_per_subband = 400);

struct CorpusOptions {
  std::uint64_t seed = 42;
  int count = 200;
  std::vector<int> ports{1, 2, 4};
  int min_order = 2;
  int max_order = 10;
  std::vector<double> targets{0.8, 0.99, 1.001, 1.2};
};

struct CorpusEntry {
  std::string name;
  PoleResidueModel model;
  double target = 0.0;
  double scale = 0.0;
  MetricPeak peak;  // of the scaled model
  bool intended_passive = true;
};

/// Models are scaled so that their maximum phi equals the target. Targets
/// cycle with the model index.
std::vector<CorpusEntry> generate_corpus(const CorpusOptions& options);

nlohmann::json corpus_manifest(const CorpusOptions& options, const std::vector<CorpusEntry>& entries);

/// Writes <name>.json per model and manifest.json.
void write_corpus(const std::filesystem::path& dir, const CorpusOptions& options,
                  const std::vector<CorpusEntry>& entries);

}  // namespace passivity
