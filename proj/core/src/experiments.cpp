#include "scmnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scmnet/engine.hpp"

namespace scmnet {

namespace {

constexpr double kTwoPi = 6.283185307179586;

void validate_sim(const SimSettings& sim) {
  if (!(sim.grid.t_max > 0.0) || sim.grid.n_points < 2) {
    throw std::invalid_argument("simulation grid needs t_max > 0 and at least 2 points");
  }
  if (sim.n_traj < 1) throw std::invalid_argument("n_traj must be positive");
  if (!(sim.threshold > 0.0 && sim.threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1)");
  }
  if (sim.workers < 1) throw std::invalid_argument("workers must be positive");
}

/// Ensemble-mean epsilon plus a batch-mean standard error at one noise
/// setting.
EpsilonEstimate score_point(const ExcitationNetwork& net, const NoiseProfile& profile,
                            const SimSettings& sim, std::uint64_t seed) {
  EnsembleOptions options;
  options.workers = sim.workers;
  options.keep_batch_means = true;
  options.early_exit = sim.early_exit;
  options.epsilon_threshold = sim.threshold;
  const EnsembleDynamics dynamics =
      simulate_ensemble(net, profile, sim.grid, sim.n_traj, seed, options);
  return score_dynamics(dynamics, sim.threshold);
}

}  // namespace

EpsilonEstimate score_dynamics(const EnsembleDynamics& dynamics, double threshold) {
  EpsilonEstimate estimate;
  const PerformanceResult mean_perf =
      performance(dynamics.mean, dynamics.grid, threshold);
  estimate.epsilon = mean_perf.epsilon;
  estimate.reached = mean_perf.reached;
  estimate.t_star = mean_perf.crossing_time.value_or(0.0);

  std::vector<double> batch_eps;
  for (const auto& curve : dynamics.batch_means) {
    if (curve.empty()) continue;
    batch_eps.push_back(performance(curve, dynamics.grid, threshold).epsilon);
  }
  const std::size_t b = batch_eps.size();
  if (b < 2) return estimate;
  double mean = 0.0;
  for (double e : batch_eps) mean += e;
  mean /= static_cast<double>(b);
  double var = 0.0;
  for (double e : batch_eps) var += (e - mean) * (e - mean);
  var /= static_cast<double>(b - 1);
  estimate.epsilon_se = std::sqrt(var / static_cast<double>(b));
  return estimate;
}

NoiseProfile PatternSpec::build(const ExcitationNetwork& net, double k, double zeta,
                                double theta) const {
  const int n = net.n_sites();
  switch (kind) {
    case NoisePattern::homogeneous:
      return NoiseProfile::homogeneous(n, k, zeta, theta);
    case NoisePattern::localized:
      return NoiseProfile::localized(n, net.initial_node(), k, zeta, theta);
    case NoisePattern::mask:
      return NoiseProfile::masked(n, mask_nodes, k, zeta, theta);
  }
  throw std::logic_error("unknown noise pattern");
}

std::vector<double> log_spaced_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("log grid needs 0 < lo <= hi");
  }
  if (points < 1 || (points == 1 && hi != lo)) {
    throw std::invalid_argument("log grid needs at least 2 points when lo < hi");
  }
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = (std::log(hi) - std::log(lo)) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = std::exp(std::log(lo) + step * i);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

int default_zeta_points(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("zeta range needs 0 < lo <= hi");
  const double decades = std::log10(hi / lo);
  return std::max(2, static_cast<int>(std::lround(60.0 * decades)));
}

void SweepSpec::validate(const ExcitationNetwork& net) const {
  validate_sim(sim);
  if (k_values.empty()) throw std::invalid_argument("sweep needs at least one k value");
  for (double k : k_values) {
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("k values must be positive");
  }
  if (zeta_grid.empty()) throw std::invalid_argument("sweep needs a zeta grid");
  double prev = 0.0;
  for (double z : zeta_grid) {
    if (!(z > prev) || !std::isfinite(z)) {
      throw std::invalid_argument("zeta grid must be positive and strictly increasing");
    }
    prev = z;
  }
  if (!std::isfinite(theta) || !(theta > 0.0) || !(theta < kTwoPi))
    throw std::invalid_argument("theta must lie in (0, 2 pi)");
  if (pattern.kind == NoisePattern::mask) {
    if (pattern.mask_nodes.empty()) throw std::invalid_argument("mask pattern needs nodes");
    for (int node : pattern.mask_nodes) {
      if (node < 0 || node >= net.n_sites()) {
        throw std::invalid_argument("mask node " + std::to_string(node + 1) +
                                    " outside 1.." + std::to_string(net.n_sites()));
      }
    }
  }
}

std::vector<SweepRow> run_sweep(const ExcitationNetwork& net, const SweepSpec& spec) {
  spec.validate(net);
  const SplitRng root(spec.seed);
  std::vector<SweepRow> rows;
  rows.reserve(spec.k_values.size() * spec.zeta_grid.size());
  for (std::size_t a = 0; a < spec.k_values.size(); ++a) {
    for (std::size_t b = 0; b < spec.zeta_grid.size(); ++b) {
      const double k = spec.k_values[a];
      const double zeta = spec.zeta_grid[b];
      const NoiseProfile profile = spec.pattern.build(net, k, zeta, spec.theta);
      const std::uint64_t point_seed =
          root.split(a * spec.zeta_grid.size() + b).key();
      const EpsilonEstimate score = score_point(net, profile, spec.sim, point_seed);
      rows.push_back(SweepRow{k, zeta, score.epsilon, score.epsilon_se});
    }
  }
  return rows;
}

ThetaSweepResult run_theta_sweep(const ExcitationNetwork& net, const SweepSpec& spec,
                                 const std::vector<double>& thetas) {
  if (thetas.empty()) throw std::invalid_argument("theta sweep needs at least one theta");
  for (double theta : thetas) {
    if (!(theta > 0.0) || !(theta < kTwoPi)) {
      throw std::invalid_argument("theta values must lie in (0, 2 pi)");
    }
  }
  ThetaSweepResult result;
  for (double theta : thetas) {
    SweepSpec point_spec = spec;
    point_spec.theta = theta;  // same seed: schedules are shared across theta
    const std::vector<SweepRow> rows = run_sweep(net, point_spec);
    for (const SweepRow& row : rows) {
      result.rows.push_back({theta, row.k, row.zeta, row.epsilon, row.epsilon_se});
    }
    for (double k : spec.k_values) {
      const SweepRow* best = nullptr;
      for (const SweepRow& row : rows) {
        if (row.k == k && (best == nullptr || row.epsilon > best->epsilon)) best = &row;
      }
      result.peaks.push_back({theta, k, best->zeta, best->epsilon});
    }
  }
  return result;
}

void ReshuffleSpec::validate(const ExcitationNetwork& net) const {
  validate_sim(sim);
  if (samples < 1) throw std::invalid_argument("reshuffle needs at least one sample");
  profile.validate();
  if (profile.n_sites() != net.n_sites()) {
    throw std::invalid_argument("noise profile size does not match the network");
  }
}

ReshuffleResult run_reshuffle(const ExcitationNetwork& net, const ReshuffleSpec& spec) {
  spec.validate(net);
  const SplitRng root(spec.seed);
  // One shared simulation seed: epsilon differences between networks are then
  // due to the couplings alone, never to resampled collision noise.
  const std::uint64_t sim_seed = root.split(1).key();

  ReshuffleResult result;
  result.baseline_epsilon =
      score_point(net, spec.profile, spec.sim, sim_seed).epsilon;
  result.epsilons.reserve(spec.samples);
  long outperform = 0;
  for (long m = 0; m < spec.samples; ++m) {
    SplitRng perm_rng = root.split(static_cast<std::uint64_t>(m) + 2);
    const ExcitationNetwork sample = reshuffle_couplings(net, perm_rng);
    const double eps = score_point(sample, spec.profile, spec.sim, sim_seed).epsilon;
    result.epsilons.push_back(eps);
    if (eps > result.baseline_epsilon) ++outperform;
  }
  result.outperform_fraction =
      static_cast<double>(outperform) / static_cast<double>(spec.samples);
  return result;
}

std::vector<ParamSummary> summarize_pool(const std::vector<Individual>& pool, int n_sites) {
  if (pool.empty()) throw std::invalid_argument("cannot summarize an empty pool");
  for (const Individual& ind : pool) {
    if (ind.genes.size() != 2 * static_cast<std::size_t>(n_sites)) {
      throw std::invalid_argument("pool chromosome length does not match n_sites");
    }
  }
  auto quantile = [](const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };

  std::vector<ParamSummary> summaries;
  summaries.reserve(2 * static_cast<std::size_t>(n_sites));
  for (std::size_t j = 0; j < 2 * static_cast<std::size_t>(n_sites); ++j) {
    std::vector<double> values;
    values.reserve(pool.size());
    for (const Individual& ind : pool) values.push_back(ind.genes[j]);
    std::sort(values.begin(), values.end());
    const bool rate_gene = j < static_cast<std::size_t>(n_sites);
    const std::size_t node = rate_gene ? j : j - static_cast<std::size_t>(n_sites);
    ParamSummary s;
    s.name = (rate_gene ? "zeta_" : "k_") + std::to_string(node + 1);
    s.min = values.front();
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    s.max = values.back();
    summaries.push_back(std::move(s));
  }
  return summaries;
}

}  // namespace scmnet
