#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "scmnet/density_matrix.hpp"
#include "scmnet/network.hpp"
#include "scmnet/time_grid.hpp"

namespace scmnet {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Right-hand side of the Markovian master equation for Poisson collision
/// statistics: -i (H_eff rho - rho H_eff†) + sum_i rate_i (Phi_i[rho] - rho),
/// where Phi_i is the dephasing collision channel and the asymmetric product
/// absorbs the non-Hermitian sink term.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const ExcitationNetwork& net,
                              const Eigen::VectorXd& rates, double theta);

/// Fixed-step RK4 integration of the master equation from |r><r|, reporting
/// the sink population on the grid. The step is halved until two successive
/// refinements agree to `refine_tol` in max norm; more than `max_halvings`
/// refinements raise IntegrationError. If `states` is non-null it receives
/// the density matrix at every grid point (from the accepted refinement).
std::vector<double> integrate_lindblad(const ExcitationNetwork& net, const Eigen::VectorXd& rates,
                                       double theta, const TimeGrid& grid,
                                       double refine_tol = 1e-8, int max_halvings = 20,
                                       std::vector<DensityMatrix>* states = nullptr);

}  // namespace scmnet
