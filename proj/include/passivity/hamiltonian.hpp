#pragma once

#include "passivity/band.hpp"
#include "passivity/model.hpp"

#include <stdexcept>
#include <vector>

namespace passivity {

enum class HamiltonianKind { FullMatrix, ExtendedPencil };

/// Either the 2N x 2N Hamiltonian matrix, or the extended pencil
/// (matrix, pencil_k) of size 2N + 2P used when sigma_max(D) is within
/// `switch_tol` of 1.
struct HamiltonianProblem {
  HamiltonianKind kind = HamiltonianKind::FullMatrix;
  RealMatrix matrix;
  RealMatrix pencil_k;  // empty for FullMatrix
  int state_order = 0;
  int port_count = 0;
  /// Reference frequency for deduplicating crossings.
  double frequency_scale = 1.0;

  int dimension() const { return static_cast<int>(matrix.rows()); }
};

class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleOptions {
  double imag_tol = 1e-8;
  double dedup_rel = 1e-9;
  int max_dimension = 4000;
  double switch_tol = 1e-4;
  double gamma = 1.0;
};

HamiltonianProblem build_problem(const StateSpaceModel& ss, double switch_tol = 1e-4);

/// Builds the requested form regardless of the switch rule.
HamiltonianProblem build_problem(const StateSpaceModel& ss, HamiltonianKind kind);

/// Sorted, deduplicated omega >= 0 such that j omega is a (generalized)
/// eigenvalue with |Re| <= imag_tol max(1, |lambda|).
struct CrossingSet {
  std::vector<double> frequencies;
  double tolerance = 0.0;
};

/// All eigenvalues of the problem (finite ones only for the pencil).
std::vector<Complex> hamiltonian_eigenvalues(const HamiltonianProblem& problem,
                                             const OracleOptions& options = {});

CrossingSet imaginary_crossings(const HamiltonianProblem& problem,
                                const OracleOptions& options = {});

struct OracleVerdict {
  bool passive = true;
  std::vector<ViolationBand> bands;
  CrossingSet crossings;
  HamiltonianKind kind = HamiltonianKind::FullMatrix;
};

/// Splits [0, inf) at the crossings and probes phi inside every interval.
OracleVerdict oracle_verdict(const StateSpaceModel& ss, const PoleResidueModel& model,
                             const OracleOptions& options = {});

}  // namespace passivity
