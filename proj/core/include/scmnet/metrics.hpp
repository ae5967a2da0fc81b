#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "scmnet/time_grid.hpp"

namespace scmnet {

struct InvalidSeriesError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Transport performance: epsilon = 1 / t*, the inverse of the time the sink
/// population needs to reach the threshold. epsilon = 0 when the threshold is
/// never reached inside the grid.
struct PerformanceResult {
  double epsilon = 0.0;
  bool reached = false;
  std::optional<double> crossing_time;
};

/// t* is linearly interpolated at the first grid crossing of `threshold`.
/// The series must be non-decreasing up to `mono_tol`; larger decreases throw
/// InvalidSeriesError.
PerformanceResult performance(std::span<const double> series, const TimeGrid& grid,
                              double threshold = 0.95, double mono_tol = 1e-9);

/// Collision rates commensurate with the fully connected graph's revival
/// period: zeta_m = g N / (2 pi m), m = 1..m_max. Near-periodic collisions at
/// these rates keep hitting a re-localized state and lose their effect.
std::vector<double> predicted_drop_rates(int n, double g, int m_max);

}  // namespace scmnet
