#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <utility>

namespace scmnet {

/// Single-excitation density matrix: Hermitian, positive semidefinite,
/// trace in (0, 1]. With a sink attached the trace decays; the missing
/// probability is the sink population.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("DensityMatrix: matrix must be square");
  }

  /// |site><site| in the localized basis (site is 0-based).
  static DensityMatrix pure_site(int n, int site) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    m(site, site) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix maximally_mixed(int n) {
    return DensityMatrix(Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& mat() const { return m_; }
  Eigen::MatrixXcd& mat() { return m_; }

  double trace_real() const { return m_.trace().real(); }

  void resymmetrize() { m_ = 0.5 * (m_ + m_.adjoint()).eval(); }

  /// Throws std::domain_error when the state leaves its invariant envelope.
  void validate(double herm_tol = 1e-12, double eig_tol = 1e-10,
                double trace_tol = 1e-12) const {
    if (!m_.allFinite()) throw std::domain_error("DensityMatrix: non-finite entries");
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) throw std::domain_error("DensityMatrix: not Hermitian");
    const double tr = trace_real();
    if (!(tr > 0.0 && tr <= 1.0 + trace_tol))
      throw std::domain_error("DensityMatrix: trace outside (0, 1]");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m_ + m_.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eig_tol)
      throw std::domain_error("DensityMatrix: negative eigenvalue");
  }

 private:
  Eigen::MatrixXcd m_;
};

}  // namespace scmnet
