#pragma once

#include <Eigen/Dense>
#include <vector>

#include "scmnet/rng.hpp"

namespace scmnet {

/// Per-node Weibull collision statistics plus the common interaction
/// strength theta. rate(i) is the mean collision rate zeta_i = 1/<t_i>;
/// zero means node i never collides. The Weibull scale follows as
/// lambda_i = 1 / (zeta_i * Gamma(1 + 1/k_i)).
struct NoiseProfile {
  Eigen::VectorXd shape;  // k_i, must be > 0 wherever rate > 0
  Eigen::VectorXd rate;   // zeta_i >= 0
  double theta = 0.0;     // radians

  static NoiseProfile none(int n);
  static NoiseProfile homogeneous(int n, double k, double zeta, double theta);
  static NoiseProfile localized(int n, int node, double k, double zeta, double theta);
  static NoiseProfile masked(int n, const std::vector<int>& nodes, double k, double zeta,
                             double theta);

  int n_sites() const { return static_cast<int>(rate.size()); }
  double scale(int i) const;  // lambda_i; only meaningful where rate(i) > 0
  bool silent() const { return rate.maxCoeff() == 0.0; }
  void validate() const;
};

/// Inverse CDF of Weibull(k, lambda) at u in [0, 1).
double weibull_quantile(double k, double lambda, double u);

/// One inter-collision interval drawn by inversion.
double sample_weibull_interval(double k, double lambda, SplitRng& rng);

struct CollisionEvent {
  double time;
  int node;
};

/// Chronological collision schedule on [0, t_max]; simultaneous events are
/// ordered by ascending node index.
using CollisionSchedule = std::vector<CollisionEvent>;

/// Ordinary renewal process per active node, started at t = 0, truncated at
/// t_max, merged and sorted. Node i draws from the substream
/// traj_stream.split(i), so the schedule restricted to one node never
/// depends on which other nodes are active.
CollisionSchedule generate_schedule(const NoiseProfile& profile, double t_max,
                                    const SplitRng& traj_stream);

}  // namespace scmnet
