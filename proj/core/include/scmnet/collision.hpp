#pragma once

#include <Eigen/Dense>

#include "scmnet/density_matrix.hpp"

namespace scmnet {

/// Dephasing collision channel on qubit `node`, restricted to the
/// single-excitation subspace: coherences to the collided node scale by
/// cos(theta), everything else (including all populations) is untouched.
/// Trace-preserving, unital, and positivity-preserving for every theta.
void apply_collision_in_place(Eigen::MatrixXcd& rho, int node, double theta);

DensityMatrix apply_collision(const DensityMatrix& rho, int node, double theta);

}  // namespace scmnet
