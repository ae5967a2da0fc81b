#include "scmnet/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <span>
#include <thread>

#include "scmnet/metrics.hpp"

namespace scmnet {

namespace {

struct TrajectoryScratch {
  Eigen::MatrixXcd rho;
};

void run_trajectory(const Propagator& prop, int initial_node, const NoiseProfile& profile,
                    const TimeGrid& grid, const SplitRng& traj_stream,
                    const EnsembleOptions& options, std::span<double> out,
                    TrajectoryScratch& scratch, std::vector<DensityMatrix>* states) {
  const CollisionSchedule schedule =
      profile.silent() ? CollisionSchedule{} : generate_schedule(profile, grid.t_max, traj_stream);
  const double cos_theta = std::cos(profile.theta);
  const double exit_level = 1.0 - options.early_exit_residual;

  scratch.rho = prop.to_coords(DensityMatrix::pure_site(prop.dim(), initial_node).mat());
  Eigen::MatrixXcd& rho = scratch.rho;

  double t = 0.0;
  double prev_sink = 0.0;
  std::size_t next_event = 0;
  for (int gi = 0; gi < grid.n_points; ++gi) {
    const double t_grid = grid.time(gi);
    while (next_event < schedule.size() && schedule[next_event].time < t_grid) {
      prop.advance_coords(rho, schedule[next_event].time - t);
      t = schedule[next_event].time;
      prop.collide_coords(rho, schedule[next_event].node, cos_theta);
      ++next_event;
    }
    prop.advance_coords(rho, t_grid - t);
    t = t_grid;

    double sink = 1.0 - prop.trace_real_coords(rho);
    sink = std::min(1.0, std::max(prev_sink, sink));  // clamp roundoff, keep monotone
    out[gi] = sink;
    prev_sink = sink;
    if (states) states->emplace_back(prop.from_coords(rho));

    if (options.early_exit && sink >= exit_level) {
      for (int rest = gi + 1; rest < grid.n_points; ++rest) {
        out[rest] = sink;
        if (states) states->emplace_back(prop.from_coords(rho));
      }
      break;
    }
  }
}

}  // namespace

std::vector<double> simulate_trajectory(const Propagator& prop, int initial_node,
                                        const NoiseProfile& profile, const TimeGrid& grid,
                                        const SplitRng& traj_stream,
                                        std::vector<DensityMatrix>* states) {
  std::vector<double> series(grid.n_points);
  TrajectoryScratch scratch;
  if (states) {
    states->clear();
    states->reserve(grid.n_points);
  }
  run_trajectory(prop, initial_node, profile, grid, traj_stream, EnsembleOptions{}, series,
                 scratch, states);
  return series;
}

std::vector<double> simulate_trajectory(const ExcitationNetwork& net, const NoiseProfile& profile,
                                        const TimeGrid& grid, const SplitRng& traj_stream,
                                        std::vector<DensityMatrix>* states) {
  Propagator prop(single_excitation_hamiltonian(net));
  return simulate_trajectory(prop, net.initial_node(), profile, grid, traj_stream, states);
}

EnsembleDynamics simulate_ensemble(const ExcitationNetwork& net, const NoiseProfile& profile,
                                   const TimeGrid& grid, long n_traj, std::uint64_t seed,
                                   const EnsembleOptions& options) {
  if (n_traj < 1) throw std::invalid_argument("simulate_ensemble: n_traj must be >= 1");
  if (options.block_size < 1 || options.n_batches < 1 || options.workers < 1)
    throw std::invalid_argument("simulate_ensemble: invalid options");
  profile.validate();
  if (profile.n_sites() != net.n_sites())
    throw std::invalid_argument("simulate_ensemble: profile/network size mismatch");

  const Propagator prop(single_excitation_hamiltonian(net));
  const SplitRng root(seed);
  const int n_points = grid.n_points;
  const long block_size = options.block_size;
  const long n_blocks = (n_traj + block_size - 1) / block_size;

  std::vector<std::vector<double>> block_sum(n_blocks);
  std::vector<std::vector<double>> block_sumsq(n_blocks);

  EnsembleDynamics result;
  result.grid = grid;
  result.n_traj = n_traj;
  if (options.record_trajectory_epsilon)
    result.trajectory_epsilon.assign(static_cast<std::size_t>(n_traj), 0.0);

  std::atomic<long> next_block{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    std::vector<double> series(n_points);
    TrajectoryScratch scratch;
    try {
      for (;;) {
        const long b = next_block.fetch_add(1, std::memory_order_relaxed);
        if (b >= n_blocks) return;
        auto& sum = block_sum[b];
        auto& sumsq = block_sumsq[b];
        sum.assign(n_points, 0.0);
        sumsq.assign(n_points, 0.0);
        const long j_end = std::min<long>(n_traj, (b + 1) * block_size);
        for (long j = b * block_size; j < j_end; ++j) {
          run_trajectory(prop, net.initial_node(), profile, grid,
                         root.split(static_cast<std::uint64_t>(j)), options, series, scratch,
                         nullptr);
          for (int i = 0; i < n_points; ++i) {
            sum[i] += series[i];
            sumsq[i] += series[i] * series[i];
          }
          if (options.record_trajectory_epsilon) {
            result.trajectory_epsilon[static_cast<std::size_t>(j)] =
                performance(series, grid, options.epsilon_threshold).epsilon;
          }
        }
      }
    } catch (...) {
      std::scoped_lock lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  const int n_workers = static_cast<int>(std::min<long>(options.workers, n_blocks));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // deterministic reduction: fixed block order, independent of scheduling
  std::vector<double> total_sum(n_points, 0.0);
  std::vector<double> total_sumsq(n_points, 0.0);
  for (long b = 0; b < n_blocks; ++b)
    for (int i = 0; i < n_points; ++i) {
      total_sum[i] += block_sum[b][i];
      total_sumsq[i] += block_sumsq[b][i];
    }

  result.mean.resize(n_points);
  result.std_error.resize(n_points);
  const double n = static_cast<double>(n_traj);
  for (int i = 0; i < n_points; ++i) {
    const double mean = total_sum[i] / n;
    result.mean[i] = mean;
    if (n_traj > 1) {
      const double var = std::max(0.0, (total_sumsq[i] - n * mean * mean) / (n - 1.0));
      result.std_error[i] = std::sqrt(var / n);
    } else {
      result.std_error[i] = 0.0;
    }
  }

  if (options.keep_batch_means) {
    const int n_batches = static_cast<int>(std::min<long>(options.n_batches, n_blocks));
    result.batch_means.assign(n_batches, std::vector<double>(n_points, 0.0));
    std::vector<double> batch_count(n_batches, 0.0);
    for (long b = 0; b < n_blocks; ++b) {
      const int batch = static_cast<int>(b % n_batches);
      const long j_end = std::min<long>(n_traj, (b + 1) * block_size);
      batch_count[batch] += static_cast<double>(j_end - b * block_size);
      for (int i = 0; i < n_points; ++i) result.batch_means[batch][i] += block_sum[b][i];
    }
    for (int batch = 0; batch < n_batches; ++batch)
      for (int i = 0; i < n_points; ++i) result.batch_means[batch][i] /= batch_count[batch];
  }

  return result;
}

}  // namespace scmnet
