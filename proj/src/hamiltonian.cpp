#include "passivity/hamiltonian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace passivity {

namespace {

double spectral_scale(const RealMatrix& a) {
  if (a.size() == 0) return 1.0;
  // Row-sum norm bounds the spectral radius.
  return std::max(1e-300, a.cwiseAbs().rowwise().sum().maxCoeff());
}

HamiltonianProblem full_matrix(const StateSpaceModel& ss) {
  const int n = ss.state_order();
  const int p = ss.port_count();
  const RealMatrix eye = RealMatrix::Identity(p, p);
  const RealMatrix r = eye - ss.D.transpose() * ss.D;
  const RealMatrix s = eye - ss.D * ss.D.transpose();
  const auto r_lu = r.partialPivLu();
  const auto s_lu = s.partialPivLu();

  const RealMatrix r_inv_bt = r_lu.solve(RealMatrix(ss.B.transpose()));  // R^-1 B^T
  const RealMatrix r_inv_dt_c = r_lu.solve(RealMatrix(ss.D.transpose() * ss.C));

  HamiltonianProblem out;
  out.kind = HamiltonianKind::FullMatrix;
  out.state_order = n;
  out.port_count = p;
  out.matrix.resize(2 * n, 2 * n);
  out.matrix.topLeftCorner(n, n) = ss.A + ss.B * r_inv_dt_c;
  out.matrix.topRightCorner(n, n) = ss.B * r_inv_bt;
  out.matrix.bottomLeftCorner(n, n) = -ss.C.transpose() * s_lu.solve(ss.C);
  out.matrix.bottomRightCorner(n, n) = -ss.A.transpose() - ss.C.transpose() * ss.D * r_inv_bt;
  out.frequency_scale = spectral_scale(ss.A);
  return out;
}

HamiltonianProblem extended_pencil(const StateSpaceModel& ss) {
  const int n = ss.state_order();
  const int p = ss.port_count();
  const int size = 2 * n + 2 * p;

  HamiltonianProblem out;
  out.kind = HamiltonianKind::ExtendedPencil;
  out.state_order = n;
  out.port_count = p;
  out.matrix = RealMatrix::Zero(size, size);
  auto& m = out.matrix;
  m.block(0, 0, n, n) = ss.A;
  m.block(0, 2 * n, n, p) = ss.B;
  m.block(n, n, n, n) = -ss.A.transpose();
  m.block(n, 2 * n + p, n, p) = -ss.C.transpose();
  m.block(2 * n, n, p, n) = ss.B.transpose();
  m.block(2 * n, 2 * n, p, p) = -RealMatrix::Identity(p, p);
  m.block(2 * n, 2 * n + p, p, p) = ss.D.transpose();
  m.block(2 * n + p, 0, p, n) = ss.C;
  m.block(2 * n + p, 2 * n, p, p) = ss.D;
  m.block(2 * n + p, 2 * n + p, p, p) = -RealMatrix::Identity(p, p);

  out.pencil_k = RealMatrix::Zero(size, size);
  out.pencil_k.topLeftCorner(2 * n, 2 * n).setIdentity();
  out.frequency_scale = spectral_scale(ss.A);
  return out;
}

}  // namespace

HamiltonianProblem build_problem(const StateSpaceModel& ss, double switch_tol) {
  const int p = ss.port_count();
  double sigma_d = 0.0;
  if (p > 0) {
    Eigen::JacobiSVD<RealMatrix> svd(ss.D);
    sigma_d = svd.singularValues()(0);
  }
  if (std::abs(sigma_d - 1.0) < switch_tol) return extended_pencil(ss);
  return full_matrix(ss);
}

HamiltonianProblem build_problem(const StateSpaceModel& ss, HamiltonianKind kind) {
  return kind == HamiltonianKind::FullMatrix ? full_matrix(ss) : extended_pencil(ss);
}

std::vector<Complex> hamiltonian_eigenvalues(const HamiltonianProblem& problem,
                                             const OracleOptions& options) {
  const int dim = problem.dimension();
  if (dim > options.max_dimension) {
    std::ostringstream os;
    os << "oracle unavailable at this scale: dense eigenproblem of size " << dim
       << " exceeds the limit of " << options.max_dimension;
    throw OracleUnavailable(os.str());
  }
  std::vector<Complex> out;
  if (dim == 0) return out;

  if (problem.kind == HamiltonianKind::FullMatrix) {
    Eigen::EigenSolver<RealMatrix> solver(problem.matrix, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("oracle: eigensolver failed");
    const auto& values = solver.eigenvalues();
    out.assign(values.data(), values.data() + values.size());
    return out;
  }

  Eigen::GeneralizedEigenSolver<RealMatrix> solver(problem.matrix, problem.pencil_k, false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("oracle: generalized eigensolver failed");
  }
  const auto alphas = solver.alphas();
  const auto betas = solver.betas();
  // The 2P algebraic rows produce infinite eigenvalues; QZ returns them with
  // beta at roundoff level, i.e. far beyond any physical frequency.
  const double limit = 1e8 * problem.frequency_scale;
  for (Eigen::Index k = 0; k < alphas.size(); ++k) {
    const double beta = betas(k);
    if (beta == 0.0) continue;
    const Complex lambda = alphas(k) / beta;
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) continue;
    if (std::abs(lambda) > limit) continue;
    out.push_back(lambda);
  }
  return out;
}

CrossingSet imaginary_crossings(const HamiltonianProblem& problem, const OracleOptions& options) {
  CrossingSet out;
  out.tolerance = options.imag_tol;
  std::vector<double> candidates;
  for (const Complex& lambda : hamiltonian_eigenvalues(problem, options)) {
    if (std::abs(lambda.real()) <= options.imag_tol * std::max(1.0, std::abs(lambda))) {
      candidates.push_back(std::abs(lambda.imag()));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  const double window = options.dedup_rel * problem.frequency_scale;
  for (double w : candidates) {
    if (out.frequencies.empty() || w - out.frequencies.back() > window) {
      out.frequencies.push_back(w);
    }
  }
  return out;
}

OracleVerdict oracle_verdict(const StateSpaceModel& ss, const PoleResidueModel& model,
                             const OracleOptions& options) {
  HamiltonianProblem problem = build_problem(ss, options.switch_tol);
  problem.frequency_scale = model.frequency_scale();

  OracleVerdict verdict;
  verdict.kind = problem.kind;
  verdict.crossings = imaginary_crossings(problem, options);
  const auto& cross = verdict.crossings.frequencies;

  struct Interval {
    double lo, hi;
    double probe;
    double phi;
  };
  std::vector<Interval> intervals;
  std::vector<double> edges{0.0};
  for (double w : cross) {
    if (w > 0.0) edges.push_back(w);
  }
  edges.push_back(kInfinity);

  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double lo = edges[k];
    const double hi = edges[k + 1];
    double probe;
    if (std::isinf(hi)) {
      probe = lo > 0.0 ? 2.0 * lo : model.omega_max;
    } else if (lo == 0.0) {
      probe = 0.5 * hi;
    } else {
      probe = std::sqrt(lo * hi);
    }
    double phi = passivity_metric(model, probe);
    double peak_at = probe;
    // The interval ends at 0 and infinity are probed as well.
    if (lo == 0.0) {
      const double phi0 = passivity_metric(model, 0.0);
      if (phi0 > phi) {
        phi = phi0;
        peak_at = 0.0;
      }
    }
    if (std::isinf(hi)) {
      const double phi_inf = passivity_metric(model, kInfinity);
      if (phi_inf > phi) {
        phi = phi_inf;
        peak_at = kInfinity;
      }
    }
    intervals.push_back({lo, hi, peak_at, phi});
  }

  for (const auto& iv : intervals) {
    if (!(iv.phi > options.gamma)) continue;
    if (!verdict.bands.empty() && verdict.bands.back().omega_hi == iv.lo) {
      auto& band = verdict.bands.back();
      band.omega_hi = iv.hi;
      if (iv.phi > band.phi_peak) {
        band.phi_peak = iv.phi;
        band.omega_peak = iv.probe;
      }
      continue;
    }
    verdict.bands.push_back({iv.lo, iv.hi, iv.probe, iv.phi});
  }
  verdict.passive = verdict.bands.empty() && cross.empty();
  return verdict;
}

}  // namespace passivity
