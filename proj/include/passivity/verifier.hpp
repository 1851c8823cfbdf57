#pragma once

#include "passivity/band.hpp"
#include "passivity/mnmso.hpp"
#include "passivity/model.hpp"
#include "passivity/warp.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace passivity {

enum class Mode { Soft, Hard, Final };

struct ModePreset {
  std::string name;
  WarpParams warp;
  SearchConfig search;
};

/// soft favours speed, hard accuracy, final is for model qualification.
ModePreset preset(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);
std::string to_string(Mode mode);

/// One evaluated frequency. Control points are owned by the subband they
/// open; infinity belongs to the last subband.
struct Sample {
  double omega = 0.0;
  double zeta = 0.0;  // global warped coordinate l + t
  double phi = 0.0;
  int subband = 0;
  bool control_point = false;
};

/// Raised when the metric is not finite at some frequency.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double omega)
      : std::runtime_error(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

using MetricFn = std::function<double(double)>;

struct VerifierOptions {
  double refine_tol = 1e-9;
  int workers = 1;
  bool collect_trace = false;
  /// Replaces passivity_metric(model, .) when set. Must be safe to call
  /// concurrently if workers > 1.
  MetricFn metric;
};

struct PassivityReport {
  bool passive = true;
  std::vector<ViolationBand> bands;
  std::string mode;
  double gamma = 1.0;
  int subband_count = 0;
  std::vector<double> control_points;
  /// Sampling evaluations (control points plus tree searches), K.
  long total_evaluations = 0;
  /// Extra evaluations spent by band-edge bisection.
  long refine_evaluations = 0;
  std::vector<long> subband_evaluations;
  long violation_samples = 0;
  long retained_maxima = 0;
  long dropped_edge_maxima = 0;
  std::vector<Sample> samples;  // merged, sorted by omega
  std::vector<std::vector<IterationRecord>> trace;  // per subband, if collected
  double wall_time_s = 0.0;
};

PassivityReport check_passivity(const PoleResidueModel& model, const ModePreset& preset,
                                 const VerifierOptions& options = {});

struct EdgeMaxima {
  std::vector<std::size_t> retained;  // indices into the merged samples
  long dropped = 0;  // maxima of their own subband that lose across the boundary
};

/// Keeps violating samples that dominate their nearest neighbours in the
/// merged ordering; a plateau is represented by its leftmost sample. The
/// first and last samples only need to dominate their single neighbour.
EdgeMaxima postprocess_edge_maxima(std::span<const Sample> merged, double gamma);

/// Walks outward from each retained maximum to the nearest non-violating
/// samples and bisects the threshold crossings. `evaluations` counts the
/// metric calls made.
std::vector<ViolationBand> extract_bands(std::span<const Sample> merged,
                                         std::span<const std::size_t> maxima,
                                         const MetricFn& metric, const WarpMap& warp, double gamma,
                                         double refine_tol, long* evaluations = nullptr);

struct DenseCheckResult {
  bool violation = false;
  double worst_omega = 0.0;
  double worst_phi = 0.0;
  long count = 0;
};

/// phi at `count` points uniformly spaced in the warped coordinate of the
/// given control points (default: those of the hard preset).
DenseCheckResult dense_reference_check(const PoleResidueModel& model, long count,
                                       const WarpParams& warp_params = preset(Mode::Hard).warp,
                                       double gamma = 1.0);

}  // namespace passivity
