#pragma once

#include <cstdint>
#include <vector>

#include "scmnet/density_matrix.hpp"
#include "scmnet/network.hpp"
#include "scmnet/noise.hpp"
#include "scmnet/propagation.hpp"
#include "scmnet/rng.hpp"
#include "scmnet/time_grid.hpp"

namespace scmnet {

struct EnsembleOptions {
  int workers = 1;       // number of threads; never affects the result
  int block_size = 32;   // trajectories per reduction block (fixed, part of the result contract)
  int n_batches = 10;    // batch-mean groups available for derived error bars
  bool keep_batch_means = false;
  bool record_trajectory_epsilon = false;
  double epsilon_threshold = 0.95;
  // Stop a trajectory once the sink has absorbed all but `early_exit_level`
  // of the population and hold the series constant; bounds the error by the
  // residual trace.
  bool early_exit = false;
  double early_exit_residual = 1e-9;
};

/// Ensemble-averaged sink dynamics on a uniform grid.
struct EnsembleDynamics {
  TimeGrid grid;
  std::vector<double> mean;       // sink population per grid point
  std::vector<double> std_error;  // standard error of the mean
  long n_traj = 0;
  // filled when the corresponding option is set
  std::vector<std::vector<double>> batch_means;
  std::vector<double> trajectory_epsilon;
};

/// One stochastic realization: free evolution under the effective Hamiltonian
/// interleaved with dephasing collisions at the sampled times. Returns the
/// sink population 1 - Tr rho at every grid point. `traj_stream` is the
/// (seed, trajectory) stream; node substreams are derived from it.
/// If `states` is non-null it receives the site-basis density matrix at every
/// grid point.
std::vector<double> simulate_trajectory(const ExcitationNetwork& net,
                                        const NoiseProfile& profile, const TimeGrid& grid,
                                        const SplitRng& traj_stream,
                                        std::vector<DensityMatrix>* states = nullptr);

/// Trajectory on a prebuilt propagator (shared, read-only).
std::vector<double> simulate_trajectory(const Propagator& prop, int initial_node,
                                        const NoiseProfile& profile, const TimeGrid& grid,
                                        const SplitRng& traj_stream,
                                        std::vector<DensityMatrix>* states = nullptr);

/// Mean and standard error of the sink population over n_traj independent
/// trajectories. Trajectory j draws from SplitRng(seed).split(j); the result
/// is bitwise reproducible for a fixed seed regardless of worker count.
EnsembleDynamics simulate_ensemble(const ExcitationNetwork& net, const NoiseProfile& profile,
                                   const TimeGrid& grid, long n_traj, std::uint64_t seed,
                                   const EnsembleOptions& options = {});

}  // namespace scmnet
