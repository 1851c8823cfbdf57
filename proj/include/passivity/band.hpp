#pragma once

namespace passivity {

/// A frequency interval where phi exceeds the threshold. omega_hi may be
/// kInfinity.
struct ViolationBand {
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  double omega_peak = 0.0;
  double phi_peak = 0.0;
};

}  // namespace passivity
