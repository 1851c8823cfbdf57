#include "passivity/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace passivity {

int PoleResidueModel::pole_term_count() const {
  int count = 0;
  for (const auto& term : terms) count += term.is_pair ? 2 : 1;
  return count;
}

int PoleResidueModel::state_order() const { return pole_term_count() * port_count; }

double PoleResidueModel::frequency_scale() const {
  double scale = omega_max;
  for (const auto& term : terms) scale = std::max(scale, std::abs(term.pole));
  return scale;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::BadPortCount: return "bad port count";
    case ViolationKind::BadBandwidth: return "bad bandwidth";
    case ViolationKind::NonFinite: return "non-finite value";
    case ViolationKind::DimensionMismatch: return "dimension mismatch";
    case ViolationKind::UnstablePole: return "unstable pole";
    case ViolationKind::UnpairedConjugate: return "unpaired conjugate";
    case ViolationKind::MisstoredPair: return "misstored pair";
    case ViolationKind::ComplexResidueOnRealPole: return "complex residue on real pole";
  }
  return "unknown";
}

namespace {

template <typename Matrix>
bool all_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const auto v = m.data()[i];
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Complex>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::string describe(const char* what, int index) {
  std::ostringstream os;
  os << what << " (pole term " << index << ")";
  return os.str();
}

}  // namespace

std::vector<ModelViolation> validate(const PoleResidueModel& model) {
  std::vector<ModelViolation> out;
  const int p = model.port_count;
  if (p < 1) {
    out.push_back({ViolationKind::BadPortCount, -1, "port_count must be positive"});
  }
  if (!std::isfinite(model.omega_max) || model.omega_max <= 0.0) {
    out.push_back({ViolationKind::BadBandwidth, -1, "omega_max must be finite and positive"});
  }
  if (model.direct_term.rows() != p || model.direct_term.cols() != p) {
    out.push_back({ViolationKind::DimensionMismatch, -1, "direct_term is not P x P"});
  } else if (!all_finite(model.direct_term)) {
    out.push_back({ViolationKind::NonFinite, -1, "direct_term has non-finite entries"});
  }

  for (int n = 0; n < static_cast<int>(model.terms.size()); ++n) {
    const auto& term = model.terms[static_cast<std::size_t>(n)];
    const double re = term.pole.real();
    const double im = term.pole.imag();
    if (!std::isfinite(re) || !std::isfinite(im)) {
      out.push_back({ViolationKind::NonFinite, n, describe("non-finite pole", n)});
      continue;
    }
    if (term.residue.rows() != p || term.residue.cols() != p) {
      out.push_back({ViolationKind::DimensionMismatch, n, describe("residue is not P x P", n)});
    } else if (!all_finite(term.residue)) {
      out.push_back({ViolationKind::NonFinite, n, describe("non-finite residue", n)});
    }
    if (!(re < 0.0)) {
      out.push_back({ViolationKind::UnstablePole, n, describe("pole is not strictly stable", n)});
    }
    if (im > 0.0 && !term.is_pair) {
      out.push_back({ViolationKind::UnpairedConjugate, n, describe("unpaired conjugate", n)});
    } else if (im < 0.0) {
      if (term.is_pair) {
        out.push_back({ViolationKind::MisstoredPair, n,
                       describe("pair must be stored by its positive-imaginary member", n)});
      } else {
        out.push_back({ViolationKind::UnpairedConjugate, n, describe("unpaired conjugate", n)});
      }
    } else if (im == 0.0) {
      if (term.is_pair) {
        out.push_back({ViolationKind::MisstoredPair, n, describe("real pole flagged as pair", n)});
      }
      if (p > 0 && term.residue.rows() == p && term.residue.cols() == p &&
          term.residue.imag().cwiseAbs().maxCoeff() != 0.0) {
        out.push_back({ViolationKind::ComplexResidueOnRealPole, n,
                       describe("real pole has a complex residue", n)});
      }
    }
  }
  return out;
}

void require_valid(const PoleResidueModel& model) {
  const auto violations = validate(model);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& v : violations) os << "\n  " << v.message;
  throw ModelError(os.str());
}

StateSpaceModel realize(const PoleResidueModel& model) {
  require_valid(model);
  const int p = model.port_count;
  const int n = model.state_order();

  StateSpaceModel ss;
  ss.A = RealMatrix::Zero(n, n);
  ss.B = RealMatrix::Zero(n, p);
  ss.C = RealMatrix::Zero(p, n);
  ss.D = model.direct_term;

  const RealMatrix eye = RealMatrix::Identity(p, p);
  int offset = 0;
  for (const auto& term : model.terms) {
    const double alpha = term.pole.real();
    if (!term.is_pair) {
      ss.A.block(offset, offset, p, p) = alpha * eye;
      ss.B.block(offset, 0, p, p) = eye;
      ss.C.block(0, offset, p, p) = term.residue.real();
      offset += p;
      continue;
    }
    // [alpha beta; -beta alpha] (x) I with B = [2I; 0], C = [Re R, Im R]
    // reproduces R/(s-p) + conj(R)/(s-conj(p)).
    const double beta = term.pole.imag();
    ss.A.block(offset, offset, p, p) = alpha * eye;
    ss.A.block(offset, offset + p, p, p) = beta * eye;
    ss.A.block(offset + p, offset, p, p) = -beta * eye;
    ss.A.block(offset + p, offset + p, p, p) = alpha * eye;
    ss.B.block(offset, 0, p, p) = 2.0 * eye;
    ss.C.block(0, offset, p, p) = term.residue.real();
    ss.C.block(0, offset + p, p, p) = term.residue.imag();
    offset += 2 * p;
  }
  return ss;
}

ComplexMatrix evaluate_transfer(const PoleResidueModel& model, double omega) {
  ComplexMatrix h = model.direct_term.cast<Complex>();
  if (std::isinf(omega)) return h;
  const Complex s(0.0, omega);
  for (const auto& term : model.terms) {
    h += term.residue / (s - term.pole);
    if (term.is_pair) h += term.residue.conjugate() / (s - std::conj(term.pole));
  }
  return h;
}

ComplexMatrix evaluate_transfer(const StateSpaceModel& model, double omega) {
  if (std::isinf(omega)) return model.D.cast<Complex>();
  const int n = model.state_order();
  if (n == 0) return model.D.cast<Complex>();
  ComplexMatrix resolvent = -model.A.cast<Complex>();
  resolvent.diagonal().array() += Complex(0.0, omega);
  const ComplexMatrix x = resolvent.partialPivLu().solve(model.B.cast<Complex>());
  return model.C.cast<Complex>() * x + model.D.cast<Complex>();
}

double max_singular_value(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  if (m.rows() == 2 && m.cols() == 2) {
    // sigma_max^2 is the larger root of x^2 - |H|_F^2 x + |det H|^2.
    const double fro2 = m.squaredNorm();
    const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    const double disc = std::max(0.0, (fro2 - 2.0 * det) * (fro2 + 2.0 * det));
    return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
  }
  // Largest eigenvalue of the Gram matrix; its absolute error is a few ulps of
  // sigma_max^2, so the root is accurate to working precision.
  const ComplexMatrix gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double passivity_metric(const PoleResidueModel& model, double omega) {
  if (model.port_count == 1) {
    if (std::isinf(omega)) return std::abs(model.direct_term(0, 0));
    const Complex s(0.0, omega);
    Complex h = model.direct_term(0, 0);
    for (const auto& term : model.terms) {
      const Complex r = term.residue(0, 0);
      h += r / (s - term.pole);
      if (term.is_pair) h += std::conj(r) / (s - std::conj(term.pole));
    }
    return std::abs(h);
  }
  return max_singular_value(evaluate_transfer(model, omega));
}

PoleResidueModel scale_model(const PoleResidueModel& model, double factor) {
  PoleResidueModel out = model;
  out.direct_term *= factor;
  for (auto& term : out.terms) term.residue *= factor;
  return out;
}

}  // namespace passivity
