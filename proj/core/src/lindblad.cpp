#include "scmnet/lindblad.hpp"

#include <cmath>
#include <complex>

namespace scmnet {

namespace {

using cd = std::complex<double>;

// Entrywise the dissipator is pure damping of coherences:
// (sum_i rate_i (Phi_i[rho] - rho))_ab = -(1 - cos theta)(rate_a + rate_b) rho_ab
// for a != b, and zero on the diagonal.
Eigen::MatrixXd damping_matrix(const Eigen::VectorXd& rates, double theta) {
  const int n = static_cast<int>(rates.size());
  const double c = 1.0 - std::cos(theta);
  Eigen::MatrixXd w(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) w(a, b) = (a == b) ? 0.0 : c * (rates(a) + rates(b));
  return w;
}

Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& h_eff,
                     const Eigen::MatrixXd& damping) {
  Eigen::MatrixXcd out = cd(0.0, -1.0) * (h_eff * rho - rho * h_eff.adjoint());
  out -= damping.cwiseProduct(rho.real()).cast<cd>();
  out -= cd(0.0, 1.0) * damping.cwiseProduct(rho.imag()).cast<cd>();
  return out;
}

std::vector<double> integrate_once(const Eigen::MatrixXcd& h_eff, const Eigen::MatrixXd& damping,
                                   int initial_node, const TimeGrid& grid, int substeps,
                                   std::vector<DensityMatrix>* states) {
  const int n = static_cast<int>(h_eff.rows());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  rho(initial_node, initial_node) = 1.0;

  std::vector<double> sink(grid.n_points);
  sink[0] = 0.0;
  if (states) {
    states->clear();
    states->reserve(grid.n_points);
    states->emplace_back(rho);
  }

  const double h = grid.dt() / substeps;
  Eigen::MatrixXcd k1, k2, k3, k4;
  for (int gi = 1; gi < grid.n_points; ++gi) {
    for (int s = 0; s < substeps; ++s) {
      k1 = rhs(rho, h_eff, damping);
      k2 = rhs(rho + 0.5 * h * k1, h_eff, damping);
      k3 = rhs(rho + 0.5 * h * k2, h_eff, damping);
      k4 = rhs(rho + h * k3, h_eff, damping);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rho = (0.5 * (rho + rho.adjoint())).eval();
    sink[gi] = std::min(1.0, std::max(sink[gi - 1], 1.0 - rho.trace().real()));
    if (states) states->emplace_back(rho);
  }
  return sink;
}

}  // namespace

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const ExcitationNetwork& net,
                              const Eigen::VectorXd& rates, double theta) {
  if (rates.size() != net.n_sites())
    throw std::invalid_argument("lindblad_rhs: rates size mismatch");
  if (!rates.allFinite()) throw std::invalid_argument("lindblad_rhs: non-finite rates");
  return rhs(rho, single_excitation_hamiltonian(net), damping_matrix(rates, theta));
}

std::vector<double> integrate_lindblad(const ExcitationNetwork& net, const Eigen::VectorXd& rates,
                                       double theta, const TimeGrid& grid, double refine_tol,
                                       int max_halvings, std::vector<DensityMatrix>* states) {
  if (rates.size() != net.n_sites())
    throw std::invalid_argument("integrate_lindblad: rates size mismatch");
  if (!rates.allFinite()) throw std::invalid_argument("integrate_lindblad: non-finite rates");
  const Eigen::MatrixXcd h_eff = single_excitation_hamiltonian(net);
  const Eigen::MatrixXd damping = damping_matrix(rates, theta);

  // start with a step that keeps ||generator|| * h comfortably inside the
  // RK4 stability region
  const double gen_scale =
      h_eff.cwiseAbs().rowwise().sum().maxCoeff() + (damping.size() ? damping.maxCoeff() : 0.0);
  int substeps = std::max(1, static_cast<int>(std::ceil(grid.dt() * gen_scale / 0.5)));

  std::vector<double> coarse =
      integrate_once(h_eff, damping, net.initial_node(), grid, substeps, nullptr);
  for (int halving = 0; halving <= max_halvings; ++halving) {
    substeps *= 2;
    const bool want_states = states != nullptr;
    std::vector<double> fine =
        integrate_once(h_eff, damping, net.initial_node(), grid, substeps, want_states ? states : nullptr);
    double diff = 0.0;
    for (int i = 0; i < grid.n_points; ++i) diff = std::max(diff, std::abs(fine[i] - coarse[i]));
    if (diff < refine_tol) return fine;
    coarse = std::move(fine);
  }
  throw IntegrationError("integrate_lindblad: no convergence after maximum step halvings");
}

}  // namespace scmnet
