#include "passivity/warp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace passivity {

std::vector<std::string> warp_param_warnings(const WarpParams& params) {
  std::vector<std::string> out;
  if (params.r_cp < 1) out.emplace_back("R_cp below the recommended minimum of 1");
  if (params.r_rp < 2) out.emplace_back("R_rp below the recommended minimum of 2");
  if (params.r_hf < 3) out.emplace_back("R_hf below the recommended minimum of 3");
  if (params.kappa < 2) out.emplace_back("kappa below the typical minimum of 2");
  if (params.decades < 0.5) out.emplace_back("tail extent below the typical 0.5 decades");
  return out;
}

void check_warp_params(const WarpParams& params) {
  if (params.r_cp < 0 || params.r_rp < 0 || params.r_hf < 0) {
    throw std::invalid_argument("warp: per-class sample counts must be non-negative");
  }
  if (!(params.rho > 0.0)) throw std::invalid_argument("warp: rho must be positive");
  if (!(params.c > 1.0)) throw std::invalid_argument("warp: compensation factor c must exceed 1");
  if (!(params.q_max > 1.0)) throw std::invalid_argument("warp: Q_max must exceed 1");
  if (params.kappa < 1) throw std::invalid_argument("warp: kappa must be at least 1");
  if (!(params.decades > 0.0) || !std::isfinite(params.decades)) {
    throw std::invalid_argument("warp: tail extent must be positive");
  }
}

PoleClass classify_pole(Complex pole, double omega_max) {
  const double extent = std::max(std::abs(pole.real()), std::abs(pole.imag()));
  if (extent > 0.9 * omega_max) return PoleClass::HighFrequency;
  return pole.imag() == 0.0 ? PoleClass::Real : PoleClass::InBandComplex;
}

std::vector<double> pole_samples(std::span<const Complex> poles, const WarpParams& params,
                                 double omega_max) {
  std::vector<double> out;
  for (const Complex& pole : poles) {
    int count = 0;
    switch (classify_pole(pole, omega_max)) {
      case PoleClass::HighFrequency: count = params.r_hf; break;
      case PoleClass::Real: count = params.r_rp; break;
      case PoleClass::InBandComplex: count = params.r_cp; break;
    }
    const double beta = std::abs(pole.imag());
    double alpha = pole.real();
    // Real poles have Q = 0 and are never compensated.
    if (beta != 0.0 && beta / (2.0 * std::abs(alpha)) > params.q_max) alpha *= params.c;

    const double step = std::numbers::pi / (2.0 * (count + 1));
    for (int r = -count; r <= count; ++r) {
      const double omega = beta + alpha * std::tan(r * step);
      if (omega >= 0.0) out.push_back(omega);
    }
  }
  return out;
}

std::vector<double> tail_samples(double omega_max, const WarpParams& params) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(params.kappa) + 2);
  out.push_back(omega_max);
  for (int nu = 1; nu <= params.kappa; ++nu) {
    out.push_back(omega_max * std::pow(10.0, params.decades * nu / params.kappa));
  }
  out.push_back(kInfinity);
  return out;
}

double resolution(double p_max, int state_order, double rho) {
  if (std::isinf(rho)) return 0.0;
  return p_max / (std::max(state_order, 1) * rho);
}

ControlPointSet assemble_control_points(std::span<const double> pole_candidates,
                                        std::span<const double> tail, double min_spacing) {
  std::vector<double> protected_points(tail.begin(), tail.end());
  protected_points.push_back(0.0);
  protected_points.push_back(kInfinity);
  std::sort(protected_points.begin(), protected_points.end());
  protected_points.erase(std::unique(protected_points.begin(), protected_points.end()),
                         protected_points.end());

  std::vector<double> interior;
  interior.reserve(pole_candidates.size());
  for (double w : pole_candidates) {
    if (w >= 0.0 && std::isfinite(w)) interior.push_back(w);
  }
  std::sort(interior.begin(), interior.end());
  interior.erase(std::unique(interior.begin(), interior.end()), interior.end());

  ControlPointSet out;
  auto next_protected = protected_points.begin();
  auto it = interior.begin();
  while (next_protected != protected_points.end()) {
    // Interior candidates strictly below the next protected point.
    while (it != interior.end() && *it < *next_protected) {
      const double w = *it++;
      if (w - out.points.back() < min_spacing) continue;
      if (*next_protected - w < min_spacing) continue;
      out.points.push_back(w);
    }
    // Candidates coinciding with a protected point merge into it.
    while (it != interior.end() && *it == *next_protected) ++it;
    out.points.push_back(*next_protected++);
  }
  return out;
}

ControlPointSet build_control_points(const PoleResidueModel& model, const WarpParams& params) {
  check_warp_params(params);
  std::vector<Complex> poles;
  poles.reserve(model.terms.size());
  for (const auto& term : model.terms) poles.push_back(term.pole);
  const auto candidates = pole_samples(poles, params, model.omega_max);
  const auto tail = tail_samples(model.omega_max, params);
  const double spacing = resolution(model.frequency_scale(), model.state_order(), params.rho);
  return assemble_control_points(candidates, tail, spacing);
}

WarpMap::WarpMap(ControlPointSet control_points) : cps_(std::move(control_points)) {
  const auto& w = cps_.points;
  if (w.size() < 3) throw std::invalid_argument("warp: at least two subbands are required");
  if (w.front() != 0.0 || !std::isinf(w.back())) {
    throw std::invalid_argument("warp: control points must start at 0 and end at infinity");
  }
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!(w[i] > w[i - 1])) throw std::invalid_argument("warp: control points must increase");
  }
}

double WarpMap::warp(double omega) const {
  const auto& w = cps_.points;
  const int last = subband_count() - 1;
  if (std::isinf(omega)) return static_cast<double>(subband_count());
  if (omega <= 0.0) return 0.0;
  const auto pos = std::upper_bound(w.begin(), w.end(), omega);
  const int l = std::min(static_cast<int>(pos - w.begin()) - 1, last);
  if (l == last) return l + (omega - w[l]) / omega;
  return l + (omega - w[l]) / (w[l + 1] - w[l]);
}

double WarpMap::unwarp_local(int subband, double t) const {
  const auto& w = cps_.points;
  const auto l = static_cast<std::size_t>(subband);
  if (t <= 0.0) return w[l];
  if (t >= 1.0) return w[l + 1];
  if (subband == subband_count() - 1) return w[l] / (1.0 - t);
  return w[l] + t * (w[l + 1] - w[l]);
}

double WarpMap::unwarp(double zeta) const {
  const int count = subband_count();
  if (zeta >= count) return kInfinity;
  if (zeta <= 0.0) return 0.0;
  const int l = std::min(static_cast<int>(std::floor(zeta)), count - 1);
  return unwarp_local(l, zeta - l);
}

}  // namespace passivity
