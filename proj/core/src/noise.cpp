#include "scmnet/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scmnet {

NoiseProfile NoiseProfile::none(int n) {
  return NoiseProfile{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n), 0.0};
}

NoiseProfile NoiseProfile::homogeneous(int n, double k, double zeta, double theta) {
  NoiseProfile p{Eigen::VectorXd::Constant(n, k), Eigen::VectorXd::Constant(n, zeta), theta};
  p.validate();
  return p;
}

NoiseProfile NoiseProfile::localized(int n, int node, double k, double zeta, double theta) {
  return masked(n, {node}, k, zeta, theta);
}

NoiseProfile NoiseProfile::masked(int n, const std::vector<int>& nodes, double k, double zeta,
                                  double theta) {
  NoiseProfile p{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n), theta};
  for (int node : nodes) {
    if (node < 0 || node >= n) throw std::out_of_range("NoiseProfile: mask node out of range");
    p.shape(node) = k;
    p.rate(node) = zeta;
  }
  p.validate();
  return p;
}

double NoiseProfile::scale(int i) const {
  return 1.0 / (rate(i) * std::tgamma(1.0 + 1.0 / shape(i)));
}

void NoiseProfile::validate() const {
  if (shape.size() != rate.size())
    throw std::invalid_argument("NoiseProfile: shape/rate size mismatch");
  if (!shape.allFinite() || !rate.allFinite() || !std::isfinite(theta))
    throw std::invalid_argument("NoiseProfile: non-finite parameters");
  for (int i = 0; i < n_sites(); ++i) {
    if (rate(i) < 0.0) throw std::invalid_argument("NoiseProfile: negative rate");
    if (rate(i) > 0.0 && !(shape(i) > 0.0))
      throw std::invalid_argument("NoiseProfile: shape must be positive on active nodes");
  }
}

double weibull_quantile(double k, double lambda, double u) {
  return lambda * std::pow(-std::log1p(-u), 1.0 / k);
}

double sample_weibull_interval(double k, double lambda, SplitRng& rng) {
  return weibull_quantile(k, lambda, rng.uniform());
}

CollisionSchedule generate_schedule(const NoiseProfile& profile, double t_max,
                                    const SplitRng& traj_stream) {
  if (!(t_max > 0.0)) throw std::invalid_argument("generate_schedule: t_max must be positive");
  CollisionSchedule schedule;
  for (int node = 0; node < profile.n_sites(); ++node) {
    if (profile.rate(node) == 0.0) continue;
    const double k = profile.shape(node);
    const double lambda = profile.scale(node);
    SplitRng stream = traj_stream.split(static_cast<std::uint64_t>(node));
    double t = sample_weibull_interval(k, lambda, stream);
    while (t <= t_max) {
      schedule.push_back({t, node});
      t += sample_weibull_interval(k, lambda, stream);
    }
  }
  std::sort(schedule.begin(), schedule.end(), [](const CollisionEvent& a, const CollisionEvent& b) {
    return a.time != b.time ? a.time < b.time : a.node < b.node;
  });
  return schedule;
}

}  // namespace scmnet
