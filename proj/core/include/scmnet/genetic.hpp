#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scmnet/engine.hpp"
#include "scmnet/network.hpp"
#include "scmnet/time_grid.hpp"

namespace scmnet {

/// Candidate noise assignment: genes [0, N) are per-node mean collision
/// rates zeta_i, genes [N, 2N) are per-node shape parameters k_i.
struct Individual {
  std::vector<double> genes;
  double fitness = -1.0;     // < 0 means not evaluated
  std::uint64_t eval_tag = 0;  // hash of the settings/seed the fitness came from

  bool evaluated() const { return fitness >= 0.0; }
};

enum class MutationMode { additive, multiplicative, hybrid };

/// Simulation settings backing one fitness evaluation.
struct FitnessSettings {
  TimeGrid grid{1.0, 200};
  long n_traj = 500;
  double theta = 1.5707963267948966;  // pi/2
  double threshold = 0.95;
  bool early_exit = true;
  // Concurrent evaluations per generation; never affects fitness values.
  int workers = 1;

  std::uint64_t hash() const;  // covers every field that can change a result
};

struct GeneBounds {
  double zeta_min = 1e-2;
  double zeta_max = 1e3;
  double k_min = 0.3;
  double k_max = 30.0;
};

struct GeneticConfig {
  int pool_size = 40;
  int parent_count = 20;  // must equal pool_size / 2
  MutationMode mutation_mode = MutationMode::hybrid;
  double additive_scale = 0.25;        // sigma of the additive Gaussian
  double multiplicative_scale = 0.25;  // sigma of the log-normal factor
  int plateau_window = 10;
  double plateau_tol = 1e-4;
  int max_generations = 200;
  GeneBounds bounds;
  // Initial pool: zeta log-uniform in [zeta_min, zeta_max], k log-uniform in
  // [k_min, k_max]; same boxes clamp mutations.
  // Optional per-gene activity mask (size 2N). Inactive genes keep the value
  // given in `frozen_genes` in every individual; empty mask = all active.
  std::vector<std::uint8_t> active_mask;
  std::vector<double> frozen_genes;
  // When set, all individuals (not only fresh offspring) are re-evaluated
  // with each generation's seed; the best-fitness trace is then noisy.
  bool reevaluate_parents = false;
  FitnessSettings fitness;

  void validate(int n_sites) const;
  std::uint64_t hash() const;
};

/// Bounds box with the zeta range scaled by the network's typical coupling
/// magnitude (median nonzero |g_ij|), so rate genes are searched in units
/// that match the hopping timescale.
GeneBounds default_gene_bounds(const ExcitationNetwork& net);

/// epsilon obtained by simulating the individual's noise profile on `net`.
/// A simulation failure is reported as fitness 0 with a warning on stderr.
double evaluate_fitness(const Individual& ind, const ExcitationNetwork& net,
                        const FitnessSettings& settings, std::uint64_t eval_seed);

/// Indices of the best `parent_count` individuals, descending fitness, ties
/// broken by lower index.
std::vector<int> select_parents(const std::vector<Individual>& pool, int parent_count);

/// Child inherits a uniformly random half of the gene positions from p1 and
/// the complement from p2.
Individual crossover(const Individual& p1, const Individual& p2, SplitRng& rng);

/// In-place mutation of all active genes, clamped to the bounds box.
void mutate(Individual& ind, SplitRng& rng, const GeneticConfig& config);

struct GenerationStats {
  int generation;
  double best;
  double median;
  double mean;
};

struct GeneticResult {
  Individual best;
  std::vector<GenerationStats> history;
  std::vector<Individual> final_pool;
  int generations_run = 0;
  bool plateaued = false;
};

/// Elitist genetic search: evaluate, promote the best half, mate each parent
/// with its two ring neighbours after a seeded shuffle, mutate the offspring,
/// repeat until the best fitness plateaus or the generation cap is reached.
/// Parents survive unmodified, so the best fitness never decreases (with
/// reevaluate_parents = false). `checkpoint_path`, when non-empty, receives a
/// resumable JSON snapshot every generation.
GeneticResult run_genetic(const ExcitationNetwork& net, const GeneticConfig& config,
                          std::uint64_t seed, const std::string& checkpoint_path = "");

/// Continue a run from a checkpoint written by run_genetic. Throws
/// std::runtime_error if the checkpoint's config hash does not match.
GeneticResult resume_genetic(const ExcitationNetwork& net, const GeneticConfig& config,
                             const std::string& checkpoint_path);

}  // namespace scmnet
