#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "scmnet/density_matrix.hpp"

namespace scmnet {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// exp(M) for a general complex square matrix. Relative accuracy ~1e-12 for
/// well-conditioned inputs. Throws NumericError on non-finite input or
/// overflowing output.
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& m);

/// Short-interval propagator for an effective (generally non-Hermitian)
/// Hamiltonian, rho -> U rho U† with U = exp(-i dt H).
///
/// On construction the Hamiltonian is eigendecomposed once, H = V D V^-1;
/// stepping then only needs elementwise phase factors in eigenbasis
/// coordinates rho~ = V^-1 rho V^-†. When the eigenvector basis is too
/// ill-conditioned (or the reconstruction check fails) the class falls back
/// to dense scaling-and-squaring exponentials per step, with coordinates
/// equal to the site basis.
///
/// Instances are immutable after construction and safe to share across
/// trajectory workers.
class Propagator {
 public:
  explicit Propagator(Eigen::MatrixXcd h_eff, double cond_limit = 1e8);

  int dim() const { return static_cast<int>(h_.rows()); }
  bool spectral() const { return spectral_; }
  const Eigen::MatrixXcd& hamiltonian() const { return h_; }

  /// U(dt) in the site basis.
  Eigen::MatrixXcd step_operator(double dt) const;

  /// Site-basis step: rho <- U rho U†, re-symmetrized.
  void advance_site(Eigen::MatrixXcd& rho, double dt) const;

  // -- coordinate interface used by the trajectory engine ------------------
  // "Coordinates" are eigenbasis coordinates in spectral mode and the plain
  // site basis otherwise; the four operations below are basis-agnostic.

  Eigen::MatrixXcd to_coords(const Eigen::MatrixXcd& rho_site) const;
  Eigen::MatrixXcd from_coords(const Eigen::MatrixXcd& rho_coords) const;
  void advance_coords(Eigen::MatrixXcd& rho, double dt) const;

  /// Dephasing collision on `node`: off-diagonal row/column entries of the
  /// site-basis state scale by cos(theta).
  void collide_coords(Eigen::MatrixXcd& rho, int node, double cos_theta) const;

  double trace_real_coords(const Eigen::MatrixXcd& rho) const;

 private:
  Eigen::MatrixXcd h_;
  bool spectral_ = false;
  Eigen::VectorXcd evals_;
  Eigen::MatrixXcd v_;      // eigenvectors, columns
  Eigen::MatrixXcd v_inv_;
  Eigen::MatrixXcd gram_;   // V† V, for traces in eigen coordinates
  // phase_class_[i] is the smallest index whose eigenvalue agrees within a
  // few-ulp snap tolerance; exp() is computed once per class (degenerate
  // spectra are common here).
  std::vector<int> phase_class_;
};

/// One-off evolution rho' = U rho U† with U = exp(-i dt h_eff).
/// Hermiticity is preserved; trace is preserved when the sink rate is zero.
DensityMatrix evolve(const DensityMatrix& rho, const Eigen::MatrixXcd& h_eff, double dt);

/// Closed-form site population for the sink-free fully connected graph:
/// population of node k at time t for an excitation initially at node r.
double analytic_fc_population(int n, double g, double t, int r, int k);

/// Fraction of an initially localized excitation that can ever reach the
/// sink on the fully connected graph: 1/(N-1).
double unprotected_population(int n);

}  // namespace scmnet
