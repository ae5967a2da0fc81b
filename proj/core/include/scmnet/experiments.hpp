#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scmnet/engine.hpp"
#include "scmnet/genetic.hpp"
#include "scmnet/metrics.hpp"
#include "scmnet/network.hpp"
#include "scmnet/noise.hpp"
#include "scmnet/time_grid.hpp"

namespace scmnet {

/// Which nodes receive collisions in a parameterized scan.
enum class NoisePattern { homogeneous, localized, mask };

struct PatternSpec {
  NoisePattern kind = NoisePattern::homogeneous;
  std::vector<int> mask_nodes;  // 0-based, used when kind == mask

  /// Uniform (k, zeta) profile on the selected nodes; `localized` places the
  /// noise on the network's initial node.
  NoiseProfile build(const ExcitationNetwork& net, double k, double zeta, double theta) const;
};

struct SimSettings {
  TimeGrid grid{1.0, 2000};
  long n_traj = 2000;
  double threshold = 0.95;
  int workers = 1;
  bool early_exit = true;
};

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced_grid(double lo, double hi, int points);

/// Default sweep resolution: 60 points per decade of zeta range (minimum 2).
int default_zeta_points(double lo, double hi);

struct SweepSpec {
  PatternSpec pattern;
  std::vector<double> k_values{1.0};
  double theta = 1.5707963267948966;  // pi/2
  std::vector<double> zeta_grid;
  SimSettings sim;
  std::uint64_t seed = 1;

  void validate(const ExcitationNetwork& net) const;
};

struct SweepRow {
  double k;
  double zeta;
  double epsilon;
  double epsilon_se;  // standard error over batch-mean curves
};

struct EpsilonEstimate {
  double epsilon = 0.0;
  double epsilon_se = 0.0;
  bool reached = false;
  double t_star = 0.0;  // 0 when the threshold is never reached
};

/// Score precomputed ensemble dynamics: epsilon on the mean curve plus a
/// standard error over the batch-mean curves (0 with fewer than 2 batches,
/// or when batch means were not recorded).
EpsilonEstimate score_dynamics(const EnsembleDynamics& dynamics, double threshold);

/// epsilon(zeta) per shape value: ensemble mean sink dynamics at every
/// (k, zeta) grid point, scored against the threshold. Deterministic under
/// the seed for any worker count.
std::vector<SweepRow> run_sweep(const ExcitationNetwork& net, const SweepSpec& spec);

struct ThetaSweepResult {
  struct Row {
    double theta;
    double k;
    double zeta;
    double epsilon;
    double epsilon_se;
  };
  struct Peak {
    double theta;
    double k;
    double zeta;     // argmax over the zeta grid
    double epsilon;  // value at the argmax
  };
  std::vector<Row> rows;
  std::vector<Peak> peaks;  // one per (theta, k) pair
};

/// run_sweep once per theta with a shared seed, so collision schedules are
/// identical across theta values and curve features can be compared
/// position-by-position. Requires every theta in (0, 2 pi).
ThetaSweepResult run_theta_sweep(const ExcitationNetwork& net, const SweepSpec& spec,
                                 const std::vector<double>& thetas);

struct ReshuffleSpec {
  long samples = 500;  // number of reshuffled networks
  NoiseProfile profile;
  SimSettings sim;
  std::uint64_t seed = 1;

  void validate(const ExcitationNetwork& net) const;
};

struct ReshuffleResult {
  double baseline_epsilon = 0.0;
  std::vector<double> epsilons;       // one per reshuffled network
  double outperform_fraction = 0.0;   // strictly above baseline; ties do not count
};

/// Baseline and every reshuffled network are evaluated with the same noise
/// profile and the same simulation seed (common random numbers), so an
/// identity permutation reproduces the baseline epsilon exactly.
ReshuffleResult run_reshuffle(const ExcitationNetwork& net, const ReshuffleSpec& spec);

/// Five-number summary of one gene across the final pool.
struct ParamSummary {
  std::string name;  // "zeta_3" / "k_3", 1-based node numbering
  double min;
  double q1;
  double median;
  double q3;
  double max;
};

/// Box-plot data for an optimizer run: 2N summaries, zeta genes first.
std::vector<ParamSummary> summarize_pool(const std::vector<Individual>& pool, int n_sites);

}  // namespace scmnet
