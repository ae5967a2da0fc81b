#include "scmnet/metrics.hpp"

#include <cmath>
#include <numbers>

namespace scmnet {

PerformanceResult performance(std::span<const double> series, const TimeGrid& grid,
                              double threshold, double mono_tol) {
  if (static_cast<int>(series.size()) != grid.n_points)
    throw InvalidSeriesError("performance: series length does not match grid");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidSeriesError("performance: threshold must lie in (0, 1)");
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i] < series[i - 1] - mono_tol)
      throw InvalidSeriesError("performance: sink series decreases beyond tolerance");
  }

  PerformanceResult result;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] < threshold) continue;
    double t_star;
    if (i == 0) {
      t_star = grid.time(0);
    } else {
      const double p0 = series[i - 1];
      const double p1 = series[i];
      const double frac = (p1 > p0) ? (threshold - p0) / (p1 - p0) : 1.0;
      t_star = grid.time(static_cast<int>(i - 1)) + frac * grid.dt();
    }
    if (!(t_star > 0.0))
      throw InvalidSeriesError("performance: threshold crossed at t = 0");
    result.reached = true;
    result.crossing_time = t_star;
    result.epsilon = 1.0 / t_star;
    return result;
  }
  return result;  // never crossed: reached = false, epsilon = 0
}

std::vector<double> predicted_drop_rates(int n, double g, int m_max) {
  if (m_max < 1) throw std::invalid_argument("predicted_drop_rates: m_max must be >= 1");
  std::vector<double> rates(m_max);
  for (int m = 1; m <= m_max; ++m)
    rates[m - 1] = g * n / (2.0 * std::numbers::pi * m);
  return rates;
}

}  // namespace scmnet
