#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace passivity {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// The point at infinity on the frequency axis. Always tested with std::isinf,
/// never compared against a large finite value.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Passivity threshold for scattering representations.
struct PassivityThreshold {
  double gamma = 1.0;
};

/// One term R/(s - p) of the partial fraction expansion. A conjugate pair is
/// stored once, by its member with positive imaginary part, with `is_pair`
/// set; the partner term conj(R)/(s - conj(p)) is implied.
struct PoleTerm {
  Complex pole;
  ComplexMatrix residue;
  bool is_pair = false;
};

/// H(s) = sum_n R_n / (s - p_n) + R_0, scattering form.
struct PoleResidueModel {
  int port_count = 0;
  double omega_max = 1.0;
  RealMatrix direct_term;
  std::vector<PoleTerm> terms;

  /// Number of pole terms, counting a conjugate pair as two.
  int pole_term_count() const;
  /// Dynamic order of the full-rank real realization (pole_term_count * P).
  int state_order() const;
  /// max(omega_max, max_n |p_n|).
  double frequency_scale() const;
};

struct StateSpaceModel {
  RealMatrix A;
  RealMatrix B;
  RealMatrix C;
  RealMatrix D;

  int state_order() const { return static_cast<int>(A.rows()); }
  int port_count() const { return static_cast<int>(D.rows()); }
};

enum class ViolationKind {
  BadPortCount,
  BadBandwidth,
  NonFinite,
  DimensionMismatch,
  UnstablePole,
  UnpairedConjugate,
  MisstoredPair,
  ComplexResidueOnRealPole,
};

struct ModelViolation {
  ViolationKind kind;
  int index = -1;  // pole term index, -1 when the violation is model-wide
  std::string message;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every violated working assumption, empty when the model is usable.
std::vector<ModelViolation> validate(const PoleResidueModel& model);

/// Throws ModelError listing the violations, if any.
void require_valid(const PoleResidueModel& model);

/// Real block (Gilbert) realization: P states per real pole, 2P per
/// conjugate pair.
StateSpaceModel realize(const PoleResidueModel& model);

/// H(j omega) by direct summation of the pole-residue form. omega may be
/// kInfinity, in which case the direct term is returned unchanged.
ComplexMatrix evaluate_transfer(const PoleResidueModel& model, double omega);

/// C (j omega I - A)^{-1} B + D. Dense solve, meant for cross-checks only.
ComplexMatrix evaluate_transfer(const StateSpaceModel& model, double omega);

/// Largest singular value of a complex matrix.
double max_singular_value(const ComplexMatrix& m);

/// phi(omega) = sigma_max{H(j omega)}.
double passivity_metric(const PoleResidueModel& model, double omega);

/// Same model with every residue and the direct term multiplied by `factor`.
/// phi scales exactly linearly.
PoleResidueModel scale_model(const PoleResidueModel& model, double factor);

std::string to_string(ViolationKind kind);

}  // namespace passivity
