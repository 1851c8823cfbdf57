#pragma once

#include "passivity/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace passivity {

/// Step-1 control parameters. `rho` may be kInfinity, which disables the
/// minimum-resolution scan.
struct WarpParams {
  double rho = 1e3;
  int r_cp = 1;          // in-band complex pairs
  int r_rp = 2;          // real poles
  int r_hf = 5;          // poles near or beyond omega_max
  double c = 50.0;       // resonance compensation factor
  double q_max = 500.0;  // quality factor above which compensation applies
  int kappa = 3;         // tail samples
  double decades = 0.5;  // tail extent beyond omega_max
};

/// Recommended-range diagnostics; values outside them are still accepted.
std::vector<std::string> warp_param_warnings(const WarpParams& params);

/// Throws std::invalid_argument on values that cannot be used at all.
void check_warp_params(const WarpParams& params);

enum class PoleClass { InBandComplex, Real, HighFrequency };

/// A pole is HighFrequency when max(|Re p|, |Im p|) > 0.9 omega_max.
PoleClass classify_pole(Complex pole, double omega_max);

/// Candidate frequencies beta + alpha tan(r pi / (2(R+1))), r = -R..R, for
/// every pole (pairs given by the positive-imaginary member, real poles with
/// zero imaginary part). Only non-negative values are returned, unsorted.
std::vector<double> pole_samples(std::span<const Complex> poles, const WarpParams& params,
                                 double omega_max);

/// omega_max * 10^(d nu / kappa), nu = 0..kappa, followed by kInfinity.
std::vector<double> tail_samples(double omega_max, const WarpParams& params);

/// Minimum spacing p_max / (N rho); zero when rho is infinite.
double resolution(double p_max, int state_order, double rho);

/// 0 = w_0 < w_1 < ... < w_L = inf.
struct ControlPointSet {
  std::vector<double> points;

  int subband_count() const { return static_cast<int>(points.size()) - 1; }
};

/// Sorts, merges exact duplicates, drops negatives, then removes interior
/// candidates closer than `min_spacing` to an already-kept point or to the
/// next protected point. 0, the tail samples and infinity are protected.
ControlPointSet assemble_control_points(std::span<const double> pole_candidates,
                                        std::span<const double> tail, double min_spacing);

/// Full step 1 for a model.
ControlPointSet build_control_points(const PoleResidueModel& model, const WarpParams& params);

/// Piecewise-linear map of [0, inf] onto [0, L]; the last subband uses
/// zeta = l + (omega - w_l) / omega.
class WarpMap {
 public:
  explicit WarpMap(ControlPointSet control_points);

  double warp(double omega) const;
  double unwarp(double zeta) const;
  /// Frequency at local coordinate t in [0, 1] of subband l.
  double unwarp_local(int subband, double t) const;

  int subband_count() const { return cps_.subband_count(); }
  const std::vector<double>& points() const { return cps_.points; }
  const ControlPointSet& control_points() const { return cps_; }

 private:
  ControlPointSet cps_;
};

}  // namespace passivity
