#include "scmnet/collision.hpp"

#include <cmath>
#include <stdexcept>

namespace scmnet {

void apply_collision_in_place(Eigen::MatrixXcd& rho, int node, double theta) {
  const int n = static_cast<int>(rho.rows());
  if (node < 0 || node >= n) throw std::out_of_range("apply_collision: node out of range");
  const double c = std::cos(theta);
  for (int j = 0; j < n; ++j) {
    if (j == node) continue;
    rho(node, j) *= c;
    rho(j, node) *= c;
  }
}

DensityMatrix apply_collision(const DensityMatrix& rho, int node, double theta) {
  DensityMatrix out = rho;
  apply_collision_in_place(out.mat(), node, theta);
  return out;
}

}  // namespace scmnet
