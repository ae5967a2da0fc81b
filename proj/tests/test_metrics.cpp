#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "scmnet/metrics.hpp"
#include "scmnet/time_grid.hpp"

using scmnet::InvalidSeriesError;
using scmnet::performance;
using scmnet::PerformanceResult;
using scmnet::predicted_drop_rates;
using scmnet::TimeGrid;

TEST_CASE("performance inverts the exact crossing time") {
  // threshold reached exactly on the second grid point, t = 10
  const TimeGrid grid{20.0, 3};
  const std::vector<double> series{0.0, 0.95, 1.0};
  const PerformanceResult r = performance(series, grid, 0.95);
  CHECK(r.reached);
  REQUIRE(r.crossing_time.has_value());
  CHECK(*r.crossing_time == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.epsilon == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("crossing time is linearly interpolated between grid points") {
  const TimeGrid grid{2.0, 3};  // times 0, 1, 2
  const std::vector<double> series{0.0, 0.90, 1.00};
  const PerformanceResult r = performance(series, grid, 0.95);
  CHECK(r.reached);
  CHECK(*r.crossing_time == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r.epsilon == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("an unreached threshold reports zero performance") {
  const TimeGrid grid{10.0, 5};
  const std::vector<double> series{0.0, 0.1, 0.2, 0.3, 0.4};
  const PerformanceResult r = performance(series, grid, 0.95);
  CHECK_FALSE(r.reached);
  CHECK(r.epsilon == 0.0);
  CHECK_FALSE(r.crossing_time.has_value());
}

TEST_CASE("series validation") {
  const TimeGrid grid{3.0, 4};

  SUBCASE("large decreases are rejected") {
    const std::vector<double> series{0.0, 0.5, 0.4999, 0.9};
    CHECK_THROWS_AS(performance(series, grid, 0.95), InvalidSeriesError);
  }

  SUBCASE("roundoff-scale decreases are tolerated") {
    const std::vector<double> series{0.0, 0.5, 0.5 - 1e-10, 0.96};
    CHECK_NOTHROW(performance(series, grid, 0.95));
  }

  SUBCASE("length must match the grid") {
    const std::vector<double> series{0.0, 0.5};
    CHECK_THROWS_AS(performance(series, grid, 0.95), InvalidSeriesError);
  }

  SUBCASE("threshold must lie strictly inside (0, 1)") {
    const std::vector<double> series{0.0, 0.2, 0.5, 0.96};
    CHECK_THROWS_AS(performance(series, grid, 0.0), InvalidSeriesError);
    CHECK_THROWS_AS(performance(series, grid, 1.0), InvalidSeriesError);
  }

  SUBCASE("a crossing at t = 0 is rejected rather than made infinite") {
    const std::vector<double> series{0.96, 0.97, 0.98, 0.99};
    CHECK_THROWS_AS(performance(series, grid, 0.95), InvalidSeriesError);
  }
}

TEST_CASE("a pointwise-dominating series never performs worse") {
  const TimeGrid grid{4.0, 5};
  const std::vector<double> slow{0.0, 0.3, 0.6, 0.9, 0.99};
  std::vector<double> fast = slow;
  for (double& p : fast) p = std::min(1.0, p + 0.05);
  fast[0] = 0.0;  // keep the first point at zero so t* stays positive
  const double eps_slow = performance(slow, grid, 0.95).epsilon;
  const double eps_fast = performance(fast, grid, 0.95).epsilon;
  CHECK(eps_fast >= eps_slow);
}

TEST_CASE("a vanishing threshold probes the first rise of the series") {
  const TimeGrid grid{4.0, 5};  // times 0, 1, 2, 3, 4
  const std::vector<double> series{0.0, 0.0, 0.0, 0.5, 1.0};
  const PerformanceResult r = performance(series, grid, 1e-9);
  REQUIRE(r.reached);
  // the crossing lands inside the step where the series first becomes
  // positive, i.e. within one grid step of t = 3
  CHECK(*r.crossing_time <= 3.0);
  CHECK(*r.crossing_time >= 3.0 - grid.dt());
}

TEST_CASE("drop rates follow the revival harmonics") {
  const std::vector<double> rates = predicted_drop_rates(20, 1.0, 3);
  REQUIRE(rates.size() == 3);
  CHECK(rates[0] == doctest::Approx(3.1831).epsilon(1e-4));
  CHECK(rates[0] == doctest::Approx(20.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(rates[1] == doctest::Approx(rates[0] / 2.0).epsilon(1e-15));
  CHECK(rates[2] == doctest::Approx(rates[0] / 3.0).epsilon(1e-15));
}

TEST_CASE("drop rates scale linearly in size and coupling") {
  const std::vector<double> base = predicted_drop_rates(20, 1.0, 2);
  const std::vector<double> bigger = predicted_drop_rates(40, 1.0, 2);
  const std::vector<double> stronger = predicted_drop_rates(20, 2.5, 2);
  for (int m = 0; m < 2; ++m) {
    CHECK(bigger[m] == doctest::Approx(2.0 * base[m]).epsilon(1e-14));
    CHECK(stronger[m] == doctest::Approx(2.5 * base[m]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(predicted_drop_rates(20, 1.0, 0), std::invalid_argument);
}
