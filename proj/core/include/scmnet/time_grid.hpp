#pragma once

#include <stdexcept>
#include <vector>

namespace scmnet {

/// Uniform time grid over [0, t_max] including both endpoints.
struct TimeGrid {
  double t_max = 0.0;
  int n_points = 2;

  TimeGrid() = default;
  TimeGrid(double t_max_, int n_points_) : t_max(t_max_), n_points(n_points_) {
    if (t_max <= 0.0 || n_points < 2)
      throw std::invalid_argument("TimeGrid: need t_max > 0 and n_points >= 2");
  }

  double dt() const { return t_max / (n_points - 1); }
  double time(int i) const { return t_max * static_cast<double>(i) / (n_points - 1); }

  std::vector<double> times() const {
    std::vector<double> t(n_points);
    for (int i = 0; i < n_points; ++i) t[i] = time(i);
    return t;
  }
};

}  // namespace scmnet
