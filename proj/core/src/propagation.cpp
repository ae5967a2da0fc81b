#include "scmnet/propagation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <utility>

namespace scmnet {

using cd = std::complex<double>;

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw NumericError("matrix_exponential: matrix not square");
  if (!m.allFinite()) throw NumericError("matrix_exponential: non-finite input");
  Eigen::MatrixXcd result = m.exp();
  if (!result.allFinite()) throw NumericError("matrix_exponential: overflow");
  return result;
}

Propagator::Propagator(Eigen::MatrixXcd h_eff, double cond_limit) : h_(std::move(h_eff)) {
  if (h_.rows() != h_.cols()) throw NumericError("Propagator: Hamiltonian not square");
  if (!h_.allFinite()) throw NumericError("Propagator: non-finite Hamiltonian");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h_, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) return;  // fallback mode

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > cond_limit) return;

  Eigen::MatrixXcd v_inv = es.eigenvectors().inverse();
  const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
  const double recon =
      (es.eigenvectors() * es.eigenvalues().asDiagonal() * v_inv - h_).cwiseAbs().maxCoeff();
  if (recon > 1e-10 * scale) return;

  spectral_ = true;
  evals_ = es.eigenvalues();
  v_ = es.eigenvectors();
  v_inv_ = std::move(v_inv);
  gram_ = v_.adjoint() * v_;

  // Group eigenvalues that agree to ~64 ulps and snap members onto their
  // representative: solver roundoff scatters truly degenerate eigenvalues
  // across the last few bits, and computing one exp() per group instead of
  // one per eigenvalue is the difference that makes dense collision schedules
  // cheap. Snapping evals_ itself keeps step_operator consistent.
  const int n = static_cast<int>(evals_.size());
  const double snap_tol = std::max(1.0, evals_.cwiseAbs().maxCoeff()) * 0x1p-46;
  phase_class_.resize(n);
  for (int i = 0; i < n; ++i) {
    phase_class_[i] = i;
    for (int j = 0; j < i; ++j) {
      if (phase_class_[j] == j && std::abs(evals_(j) - evals_(i)) <= snap_tol) {
        phase_class_[i] = j;
        evals_(i) = evals_(j);
        break;
      }
    }
  }
}

Eigen::MatrixXcd Propagator::step_operator(double dt) const {
  if (spectral_) {
    Eigen::VectorXcd phases(dim());
    for (int i = 0; i < dim(); ++i) phases(i) = std::exp(cd(0.0, -dt) * evals_(i));
    return v_ * phases.asDiagonal() * v_inv_;
  }
  return matrix_exponential(cd(0.0, -dt) * h_);
}

void Propagator::advance_site(Eigen::MatrixXcd& rho, double dt) const {
  if (dt == 0.0) return;
  const Eigen::MatrixXcd u = step_operator(dt);
  rho = u * rho * u.adjoint();
  rho = (0.5 * (rho + rho.adjoint())).eval();
}

Eigen::MatrixXcd Propagator::to_coords(const Eigen::MatrixXcd& rho_site) const {
  if (!spectral_) return rho_site;
  Eigen::MatrixXcd rho = v_inv_ * rho_site * v_inv_.adjoint();
  // establish the exact Hermitian structure advance/collide rely on
  const int n = dim();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const cd v = cd(0.5, 0.0) * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
    rho(j, j) = cd(rho(j, j).real(), 0.0);
  }
  return rho;
}

Eigen::MatrixXcd Propagator::from_coords(const Eigen::MatrixXcd& rho_coords) const {
  if (!spectral_) return rho_coords;
  return v_ * rho_coords * v_.adjoint();
}

void Propagator::advance_coords(Eigen::MatrixXcd& rho, double dt) const {
  if (dt == 0.0) return;
  if (!spectral_) {
    advance_site(rho, dt);
    return;
  }
  const int n = dim();
  Eigen::VectorXcd phases(n);
  for (int i = 0; i < n; ++i) {
    const int rep = phase_class_[i];
    phases(i) = rep == i ? std::exp(cd(0.0, -dt) * evals_(i)) : phases(rep);
  }
  // rho~_ij *= phi_i * conj(phi_j), in place on the upper triangle with the
  // lower mirrored. Forcing the diagonal exactly real each step matters: the
  // anti-Hermitian diagonal component is dynamically unstable under the
  // rank-1 collision updates when the eigenbasis is ill-conditioned, so it
  // must be damped here just as the former full symmetrization did.
  for (int j = 0; j < n; ++j) {
    const cd pj = phases(j);
    for (int i = 0; i < j; ++i) {
      const cd v = rho(i, j) * (phases(i) * std::conj(pj));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
    rho(j, j) = cd((pj * rho(j, j) * std::conj(pj)).real(), 0.0);
  }
}

void Propagator::collide_coords(Eigen::MatrixXcd& rho, int node, double cos_theta) const {
  const double c = 1.0 - cos_theta;
  if (c == 0.0) return;
  if (!spectral_) {
    const int n = dim();
    for (int j = 0; j < n; ++j) {
      if (j == node) continue;
      rho(node, j) *= cos_theta;
      rho(j, node) *= cos_theta;
    }
    return;
  }
  // Site-basis map  rho -= c (P rho + rho P - 2 P rho P), P = |node><node|,
  // expressed in eigen coordinates through the rank-1 factors
  // V^-1 P V = u w  with u = V^-1 e_node (column) and w = row `node` of V.
  // The stored state is Hermitian to the bit (mirrored triangle, real
  // diagonal), so rho w† == conj(w rho) and a single matvec suffices; the
  // update is written triangle-plus-mirror for the same exactness, which is
  // load-bearing: any anti-Hermitian residue is amplified by ~|u||w| per
  // collision and diverges at high collision rates.
  const int n = dim();
  const cd* u = v_inv_.data() + static_cast<std::ptrdiff_t>(node) * n;  // column `node`
  const Eigen::VectorXcd w = v_.row(node);
  Eigen::VectorXcd wr(n);  // (w rho)_j
  for (int j = 0; j < n; ++j) {
    cd acc(0.0, 0.0);
    const cd* col = rho.data() + static_cast<std::ptrdiff_t>(j) * n;
    for (int k = 0; k < n; ++k) acc += w(k) * col[k];
    wr(j) = acc;
  }
  double s = 0.0;  // site population rho_nn = w rho w†, real for Hermitian rho
  for (int j = 0; j < n; ++j) s += (wr(j) * std::conj(w(j))).real();
  const double two_cs = 2.0 * c * s;
  for (int j = 0; j < n; ++j) {
    const cd wrj = wr(j);
    const cd cuj = std::conj(u[j]);
    for (int i = 0; i < j; ++i) {
      const cd delta = c * (u[i] * wrj + std::conj(wr(i)) * cuj) - two_cs * (u[i] * cuj);
      const cd v = rho(i, j) - delta;
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
    const double dj = 2.0 * c * (u[j] * wrj).real() - two_cs * std::norm(u[j]);
    rho(j, j) = cd(rho(j, j).real() - dj, 0.0);
  }
}

double Propagator::trace_real_coords(const Eigen::MatrixXcd& rho) const {
  if (!spectral_) return rho.trace().real();
  return rho.cwiseProduct(gram_.conjugate()).sum().real();
}

DensityMatrix evolve(const DensityMatrix& rho, const Eigen::MatrixXcd& h_eff, double dt) {
  if (dt < 0.0) throw NumericError("evolve: dt must be non-negative");
  if (!rho.mat().allFinite()) throw NumericError("evolve: non-finite state");
  if (rho.dim() != h_eff.rows()) throw NumericError("evolve: dimension mismatch");
  Propagator prop(h_eff);
  Eigen::MatrixXcd m = rho.mat();
  prop.advance_site(m, dt);
  return DensityMatrix(std::move(m));
}

double analytic_fc_population(int n, double g, double t, int r, int k) {
  const double c = std::cos(g * n * t);
  const double delta = (r == k) ? 1.0 : 0.0;
  return delta * (1.0 + 2.0 / n * (c - 1.0)) + 2.0 / (static_cast<double>(n) * n) * (1.0 - c);
}

double unprotected_population(int n) {
  if (n < 2) throw std::invalid_argument("unprotected_population: n must be >= 2");
  return 1.0 / (n - 1);
}

}  // namespace scmnet
