#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "scmnet/engine.hpp"
#include "scmnet/lindblad.hpp"
#include "scmnet/metrics.hpp"
#include "scmnet/network.hpp"
#include "scmnet/noise.hpp"
#include "scmnet/propagation.hpp"
#include "scmnet/rng.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

scmnet::ExcitationNetwork fc20() { return scmnet::fully_connected(20, 1.0, 0, 1, 1.0); }

void BM_PropagatorBuild(benchmark::State& state) {
  const Eigen::MatrixXcd h = scmnet::single_excitation_hamiltonian(fc20());
  for (auto _ : state) {
    scmnet::Propagator prop(h);
    benchmark::DoNotOptimize(prop.spectral());
  }
}
BENCHMARK(BM_PropagatorBuild);

void BM_StepOperator(benchmark::State& state) {
  const scmnet::Propagator prop(scmnet::single_excitation_hamiltonian(fc20()));
  for (auto _ : state) {
    Eigen::MatrixXcd u = prop.step_operator(0.1);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_StepOperator);

void BM_MatrixExponential(benchmark::State& state) {
  const Eigen::MatrixXcd h = scmnet::single_excitation_hamiltonian(fc20());
  const Eigen::MatrixXcd m = std::complex<double>(0.0, -0.1) * h;
  for (auto _ : state) {
    Eigen::MatrixXcd u = scmnet::matrix_exponential(m);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_MatrixExponential);

void BM_AdvanceCoords(benchmark::State& state) {
  const scmnet::Propagator prop(scmnet::single_excitation_hamiltonian(fc20()));
  Eigen::MatrixXcd rho = prop.to_coords(scmnet::DensityMatrix::pure_site(20, 0).mat());
  for (auto _ : state) {
    prop.advance_coords(rho, 0.01);
    benchmark::DoNotOptimize(rho.data());
  }
}
BENCHMARK(BM_AdvanceCoords);

void BM_CollideCoords(benchmark::State& state) {
  const scmnet::Propagator prop(scmnet::single_excitation_hamiltonian(fc20()));
  Eigen::MatrixXcd rho = prop.to_coords(scmnet::DensityMatrix::pure_site(20, 0).mat());
  prop.advance_coords(rho, 0.3);
  for (auto _ : state) {
    prop.collide_coords(rho, 0, 0.0);
    benchmark::DoNotOptimize(rho.data());
  }
}
BENCHMARK(BM_CollideCoords);

void BM_ScheduleHomogeneous(benchmark::State& state) {
  const auto profile = scmnet::NoiseProfile::homogeneous(20, 1.0, 5.0, kPi / 2);
  const scmnet::SplitRng stream(42);
  for (auto _ : state) {
    auto schedule = scmnet::generate_schedule(profile, 100.0, stream);
    benchmark::DoNotOptimize(schedule.data());
  }
}
BENCHMARK(BM_ScheduleHomogeneous);

void BM_Trajectory(benchmark::State& state) {
  const auto net = fc20();
  const scmnet::Propagator prop(scmnet::single_excitation_hamiltonian(net));
  const auto profile = scmnet::NoiseProfile::localized(20, net.initial_node(), 10.0, 3.0, kPi / 2);
  const scmnet::TimeGrid grid(100.0, 201);
  std::uint64_t j = 0;
  for (auto _ : state) {
    auto series =
        scmnet::simulate_trajectory(prop, net.initial_node(), profile, grid, scmnet::SplitRng(1).split(j++));
    benchmark::DoNotOptimize(series.data());
  }
}
BENCHMARK(BM_Trajectory);

void BM_Ensemble32(benchmark::State& state) {
  const auto net = fc20();
  const auto profile = scmnet::NoiseProfile::localized(20, net.initial_node(), 10.0, 3.0, kPi / 2);
  const scmnet::TimeGrid grid(100.0, 201);
  for (auto _ : state) {
    auto dyn = scmnet::simulate_ensemble(net, profile, grid, 32, 7, {});
    benchmark::DoNotOptimize(dyn.mean.data());
  }
}
BENCHMARK(BM_Ensemble32);

void BM_LindbladIntegrate(benchmark::State& state) {
  const auto net = scmnet::fully_connected(10, 1.0, 0, 1, 1.0);
  const Eigen::VectorXd rates = Eigen::VectorXd::Constant(10, 2.0);
  const scmnet::TimeGrid grid(20.0, 101);
  for (auto _ : state) {
    auto series = scmnet::integrate_lindblad(net, rates, kPi / 2, grid);
    benchmark::DoNotOptimize(series.data());
  }
}
BENCHMARK(BM_LindbladIntegrate);

void BM_Performance(benchmark::State& state) {
  const scmnet::TimeGrid grid(100.0, 2001);
  std::vector<double> series(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) series[i] = 1.0 - std::exp(-0.05 * grid.time(i));
  for (auto _ : state) {
    auto result = scmnet::performance(series, grid, 0.95);
    benchmark::DoNotOptimize(result.epsilon);
  }
}
BENCHMARK(BM_Performance);

}  // namespace

BENCHMARK_MAIN();
