#pragma once

#include "passivity/model.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace fixtures {

using passivity::Complex;
using passivity::ComplexMatrix;
using passivity::PoleResidueModel;
using passivity::RealMatrix;

/// One real pole, SISO.
inline PoleResidueModel siso(double pole, double residue, double direct = 0.0,
                             double omega_max = 10.0) {
  PoleResidueModel m;
  m.port_count = 1;
  m.omega_max = omega_max;
  m.direct_term = RealMatrix::Constant(1, 1, direct);
  m.terms.push_back({Complex(pole, 0.0), ComplexMatrix::Constant(1, 1, residue), false});
  return m;
}

/// Direct summation with the conjugate partner written out explicitly.
inline ComplexMatrix summed_transfer(const PoleResidueModel& m, double omega) {
  const Complex s(0.0, omega);
  ComplexMatrix h = m.direct_term.cast<Complex>();
  for (const auto& t : m.terms) {
    for (int i = 0; i < m.port_count; ++i) {
      for (int j = 0; j < m.port_count; ++j) {
        h(i, j) += t.residue(i, j) / (s - t.pole);
        if (t.is_pair) h(i, j) += std::conj(t.residue(i, j)) / (s - std::conj(t.pole));
      }
    }
  }
  return h;
}

/// sigma_max by one-sided Jacobi SVD.
inline double svd_sigma_max(const ComplexMatrix& h) {
  Eigen::JacobiSVD<ComplexMatrix> svd(h);
  return svd.singularValues()(0);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace fixtures
