#include "scmnet/genetic.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "scmnet/metrics.hpp"
#include "scmnet/noise.hpp"

namespace scmnet {

namespace {

using nlohmann::json;

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

std::uint64_t hash_double(std::uint64_t h, double v) {
  return hash_combine(h, std::bit_cast<std::uint64_t>(v));
}

void apply_frozen(Individual& ind, const GeneticConfig& config) {
  if (config.active_mask.empty()) return;
  for (std::size_t j = 0; j < ind.genes.size(); ++j) {
    if (!config.active_mask[j]) ind.genes[j] = config.frozen_genes[j];
  }
}

Individual random_individual(SplitRng& rng, const GeneticConfig& config, int n) {
  const GeneBounds& b = config.bounds;
  const double lz0 = std::log(b.zeta_min);
  const double lz1 = std::log(b.zeta_max);
  const double lk0 = std::log(b.k_min);
  const double lk1 = std::log(b.k_max);
  Individual ind;
  ind.genes.resize(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ind.genes[i] = std::exp(lz0 + rng.uniform() * (lz1 - lz0));
  for (int i = 0; i < n; ++i) ind.genes[n + i] = std::exp(lk0 + rng.uniform() * (lk1 - lk0));
  apply_frozen(ind, config);
  return ind;
}

/// Evaluate every pool member whose cached fitness does not match this
/// generation's evaluation tag. Each fitness is a pure function of
/// (genes, settings, eval_seed), so concurrent completion order is
/// irrelevant to the outcome.
void evaluate_pool(std::vector<Individual>& pool, const ExcitationNetwork& net,
                   const GeneticConfig& config, std::uint64_t eval_seed) {
  const std::uint64_t tag = hash_combine(eval_seed, config.fitness.hash());
  std::vector<int> todo;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const bool stale = config.reevaluate_parents ? pool[i].eval_tag != tag
                                                 : !pool[i].evaluated();
    if (stale) todo.push_back(static_cast<int>(i));
  }
  const int workers =
      std::max(1, std::min(config.fitness.workers, static_cast<int>(todo.size())));

  auto eval_one = [&](int i) {
    pool[i].fitness = evaluate_fitness(pool[i], net, config.fitness, eval_seed);
    pool[i].eval_tag = tag;
  };

  if (workers == 1) {
    for (int i : todo) eval_one(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto drain = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      try {
        eval_one(todo[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(drain);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

GenerationStats pool_stats(int generation, const std::vector<Individual>& pool) {
  std::vector<double> f;
  f.reserve(pool.size());
  for (const Individual& ind : pool) f.push_back(ind.fitness);
  std::sort(f.begin(), f.end());
  const std::size_t n = f.size();
  GenerationStats stats;
  stats.generation = generation;
  stats.best = f.back();
  stats.median = (n % 2 == 0) ? 0.5 * (f[n / 2 - 1] + f[n / 2]) : f[n / 2];
  stats.mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(n);
  return stats;
}

json individual_to_json(const Individual& ind) {
  return json{{"genes", ind.genes}, {"fitness", ind.fitness}, {"eval_tag", ind.eval_tag}};
}

Individual individual_from_json(const json& j) {
  Individual ind;
  ind.genes = j.at("genes").get<std::vector<double>>();
  ind.fitness = j.at("fitness").get<double>();
  ind.eval_tag = j.at("eval_tag").get<std::uint64_t>();
  return ind;
}

void save_checkpoint(const std::string& path, std::uint64_t rng_key, std::uint64_t config_hash,
                     int next_generation, const std::vector<Individual>& pool,
                     const std::vector<GenerationStats>& history, const Individual& best) {
  json doc;
  doc["format"] = "scmnet-optimizer-checkpoint";
  doc["version"] = 1;
  doc["rng_key"] = rng_key;
  doc["config_hash"] = config_hash;
  doc["next_generation"] = next_generation;
  json jpool = json::array();
  for (const Individual& ind : pool) jpool.push_back(individual_to_json(ind));
  doc["pool"] = std::move(jpool);
  json jhist = json::array();
  for (const GenerationStats& s : history) {
    jhist.push_back({{"generation", s.generation},
                     {"best", s.best},
                     {"median", s.median},
                     {"mean", s.mean}});
  }
  doc["history"] = std::move(jhist);
  doc["best"] = individual_to_json(best);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint file: " + tmp);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint file: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

/// Core loop shared by fresh runs and checkpoint resumes. `root` is the
/// run-level stream; generation g derives its breeding stream and evaluation
/// seed from split(2g+2) and split(2g+3), so restarting at generation g
/// reproduces the original run exactly.
GeneticResult run_loop(const ExcitationNetwork& net, const GeneticConfig& config,
                       const SplitRng& root, int start_generation,
                       std::vector<Individual> pool, std::vector<GenerationStats> history,
                       Individual best, const std::string& checkpoint_path) {
  const std::uint64_t config_hash = config.hash();
  bool plateaued = false;
  int generations_done = start_generation;

  for (int g = start_generation; g < config.max_generations; ++g) {
    SplitRng gen_rng = root.split(2 * static_cast<std::uint64_t>(g) + 2);
    const std::uint64_t eval_seed = root.split(2 * static_cast<std::uint64_t>(g) + 3).key();
    evaluate_pool(pool, net, config, eval_seed);
    history.push_back(pool_stats(g, pool));
    generations_done = g + 1;

    for (const Individual& ind : pool) {
      if (!best.evaluated() || ind.fitness > best.fitness) best = ind;
    }
    if (!checkpoint_path.empty()) {
      save_checkpoint(checkpoint_path, root.key(), config_hash, g + 1, pool, history, best);
    }

    // Plateau: compare against the best from `plateau_window` generations ago.
    const int w = config.plateau_window;
    if (static_cast<int>(history.size()) >= w + 1) {
      const double then = history[history.size() - 1 - static_cast<std::size_t>(w)].best;
      if (history.back().best - then < config.plateau_tol) {
        plateaued = true;
        break;
      }
    }
    if (g + 1 == config.max_generations) break;  // never breed a generation we won't score

    const std::vector<int> parents = select_parents(pool, config.parent_count);
    std::vector<int> order = parents;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      std::swap(order[k], order[k + gen_rng.below(order.size() - k)]);
    }

    std::vector<Individual> next;
    next.reserve(pool.size());
    for (int idx : parents) next.push_back(pool[idx]);  // survive unmodified
    const int p = config.parent_count;
    for (int j = 0; j < p; ++j) {
      Individual child = crossover(pool[order[j]], pool[order[(j + 1) % p]], gen_rng);
      mutate(child, gen_rng, config);
      apply_frozen(child, config);
      child.fitness = -1.0;
      child.eval_tag = 0;
      next.push_back(std::move(child));
    }
    pool = std::move(next);
  }

  GeneticResult result;
  result.best = std::move(best);
  result.history = std::move(history);
  result.final_pool = std::move(pool);
  result.generations_run = generations_done;
  result.plateaued = plateaued;
  return result;
}

}  // namespace

std::uint64_t FitnessSettings::hash() const {
  std::uint64_t h = 0x4649544eu;
  h = hash_double(h, grid.t_max);
  h = hash_combine(h, static_cast<std::uint64_t>(grid.n_points));
  h = hash_combine(h, static_cast<std::uint64_t>(n_traj));
  h = hash_double(h, theta);
  h = hash_double(h, threshold);
  h = hash_combine(h, early_exit ? 1 : 0);
  return h;
}

std::uint64_t GeneticConfig::hash() const {
  std::uint64_t h = 0x47454e45u;
  h = hash_combine(h, static_cast<std::uint64_t>(pool_size));
  h = hash_combine(h, static_cast<std::uint64_t>(parent_count));
  h = hash_combine(h, static_cast<std::uint64_t>(mutation_mode));
  h = hash_double(h, additive_scale);
  h = hash_double(h, multiplicative_scale);
  h = hash_combine(h, static_cast<std::uint64_t>(plateau_window));
  h = hash_double(h, plateau_tol);
  h = hash_combine(h, static_cast<std::uint64_t>(max_generations));
  h = hash_double(h, bounds.zeta_min);
  h = hash_double(h, bounds.zeta_max);
  h = hash_double(h, bounds.k_min);
  h = hash_double(h, bounds.k_max);
  for (std::uint8_t v : active_mask) h = hash_combine(h, v);
  for (double v : frozen_genes) h = hash_double(h, v);
  h = hash_combine(h, reevaluate_parents ? 1 : 0);
  h = hash_combine(h, fitness.hash());
  return h;
}

void GeneticConfig::validate(int n_sites) const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("GeneticConfig: " + msg); };
  if (pool_size < 6 || pool_size % 2 != 0) fail("pool_size must be even and at least 6");
  if (parent_count != pool_size / 2) fail("parent_count must equal pool_size / 2");
  if (!(additive_scale >= 0.0) || !std::isfinite(additive_scale) ||
      !(multiplicative_scale >= 0.0) || !std::isfinite(multiplicative_scale)) {
    fail("mutation scales must be finite and non-negative");
  }
  if (plateau_window < 2) fail("plateau_window must be at least 2");
  if (!(plateau_tol >= 0.0)) fail("plateau_tol must be non-negative");
  if (max_generations < 1) fail("max_generations must be positive");
  if (!(bounds.zeta_min > 0.0 && bounds.zeta_min <= bounds.zeta_max &&
        std::isfinite(bounds.zeta_max))) {
    fail("zeta bounds must satisfy 0 < zeta_min <= zeta_max");
  }
  if (!(bounds.k_min > 0.0 && bounds.k_min <= bounds.k_max && std::isfinite(bounds.k_max))) {
    fail("shape bounds must satisfy 0 < k_min <= k_max");
  }
  const std::size_t n_genes = 2 * static_cast<std::size_t>(n_sites);
  if (!active_mask.empty()) {
    if (active_mask.size() != n_genes) fail("active_mask must have one entry per gene");
    if (frozen_genes.size() != n_genes) fail("frozen_genes must have one entry per gene");
    bool any_active = false;
    for (std::size_t j = 0; j < n_genes; ++j) {
      if (active_mask[j]) {
        any_active = true;
        continue;
      }
      const double v = frozen_genes[j];
      const bool rate_gene = j < n_genes / 2;
      if (!std::isfinite(v) || (rate_gene ? v < 0.0 : v <= 0.0)) {
        fail("frozen gene " + std::to_string(j) + " is out of range");
      }
    }
    if (!any_active) fail("active_mask disables every gene");
  } else if (!frozen_genes.empty()) {
    fail("frozen_genes given without active_mask");
  }
  if (fitness.grid.n_points < 2 || !(fitness.grid.t_max > 0.0)) {
    fail("fitness grid needs t_max > 0 and at least 2 points");
  }
  if (fitness.n_traj < 1) fail("fitness n_traj must be positive");
  if (!(fitness.threshold > 0.0 && fitness.threshold < 1.0)) {
    fail("fitness threshold must lie in (0, 1)");
  }
  if (fitness.workers < 1) fail("fitness workers must be positive");
}

GeneBounds default_gene_bounds(const ExcitationNetwork& net) {
  std::vector<double> magnitudes;
  const Eigen::MatrixXd& g = net.couplings();
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = i + 1; j < g.cols(); ++j) {
      if (g(i, j) != 0.0) magnitudes.push_back(std::abs(g(i, j)));
    }
  }
  double typical = 1.0;
  if (!magnitudes.empty()) {
    std::sort(magnitudes.begin(), magnitudes.end());
    const std::size_t n = magnitudes.size();
    typical = (n % 2 == 0) ? 0.5 * (magnitudes[n / 2 - 1] + magnitudes[n / 2])
                           : magnitudes[n / 2];
  }
  GeneBounds b;
  b.zeta_min *= typical;
  b.zeta_max *= typical;
  return b;
}

double evaluate_fitness(const Individual& ind, const ExcitationNetwork& net,
                        const FitnessSettings& settings, std::uint64_t eval_seed) {
  const int n = net.n_sites();
  if (ind.genes.size() != 2 * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("evaluate_fitness: expected " + std::to_string(2 * n) +
                                " genes, got " + std::to_string(ind.genes.size()));
  }
  try {
    NoiseProfile profile;
    profile.rate = Eigen::VectorXd(n);
    profile.shape = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
      profile.rate(i) = ind.genes[i];
      profile.shape(i) = ind.genes[n + i];
    }
    profile.theta = settings.theta;

    EnsembleOptions options;
    options.early_exit = settings.early_exit;
    options.epsilon_threshold = settings.threshold;
    const EnsembleDynamics dynamics =
        simulate_ensemble(net, profile, settings.grid, settings.n_traj, eval_seed, options);
    return performance(dynamics.mean, settings.grid, settings.threshold).epsilon;
  } catch (const std::exception& e) {
    std::cerr << "warning: fitness evaluation failed (" << e.what()
              << "); assigning fitness 0\n";
    return 0.0;
  }
}

std::vector<int> select_parents(const std::vector<Individual>& pool, int parent_count) {
  if (parent_count < 1 || parent_count > static_cast<int>(pool.size())) {
    throw std::invalid_argument("select_parents: parent_count out of range");
  }
  for (const Individual& ind : pool) {
    if (!ind.evaluated()) throw std::logic_error("select_parents: unevaluated individual");
  }
  std::vector<int> index(pool.size());
  std::iota(index.begin(), index.end(), 0);
  // stable sort keeps the lower index in front on fitness ties
  std::stable_sort(index.begin(), index.end(),
                   [&pool](int a, int b) { return pool[a].fitness > pool[b].fitness; });
  index.resize(parent_count);
  return index;
}

Individual crossover(const Individual& p1, const Individual& p2, SplitRng& rng) {
  const std::size_t m = p1.genes.size();
  if (p2.genes.size() != m) throw std::invalid_argument("crossover: chromosome length mismatch");
  if (m == 0 || m % 2 != 0) throw std::invalid_argument("crossover: chromosome length must be even");

  // draw a uniformly random half of the positions via partial Fisher-Yates
  std::vector<std::uint32_t> position(m);
  std::iota(position.begin(), position.end(), 0u);
  std::vector<char> from_p1(m, 0);
  for (std::size_t k = 0; k < m / 2; ++k) {
    std::swap(position[k], position[k + rng.below(m - k)]);
    from_p1[position[k]] = 1;
  }

  Individual child;
  child.genes.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    child.genes[j] = from_p1[j] ? p1.genes[j] : p2.genes[j];
  }
  return child;
}

void mutate(Individual& ind, SplitRng& rng, const GeneticConfig& config) {
  const std::size_t m = ind.genes.size();
  const std::size_t n = m / 2;
  const bool masked = !config.active_mask.empty();
  for (std::size_t j = 0; j < m; ++j) {
    if (masked && !config.active_mask[j]) continue;
    bool add = false;
    bool mul = false;
    switch (config.mutation_mode) {
      case MutationMode::additive:
        add = true;
        break;
      case MutationMode::multiplicative:
        mul = true;
        break;
      case MutationMode::hybrid:
        add = rng.uniform() < 0.5;
        mul = rng.uniform() < 0.5;
        break;
    }
    double g = ind.genes[j];
    if (add) g += rng.normal() * config.additive_scale;
    if (mul) g *= std::exp(rng.normal() * config.multiplicative_scale);
    const double lo = (j < n) ? config.bounds.zeta_min : config.bounds.k_min;
    const double hi = (j < n) ? config.bounds.zeta_max : config.bounds.k_max;
    ind.genes[j] = std::clamp(g, lo, hi);
  }
}

GeneticResult run_genetic(const ExcitationNetwork& net, const GeneticConfig& config,
                          std::uint64_t seed, const std::string& checkpoint_path) {
  config.validate(net.n_sites());
  const SplitRng root(seed);
  SplitRng init_rng = root.split(1);
  std::vector<Individual> pool;
  pool.reserve(config.pool_size);
  for (int i = 0; i < config.pool_size; ++i) {
    pool.push_back(random_individual(init_rng, config, net.n_sites()));
  }
  return run_loop(net, config, root, 0, std::move(pool), {}, Individual{}, checkpoint_path);
}

GeneticResult resume_genetic(const ExcitationNetwork& net, const GeneticConfig& config,
                             const std::string& checkpoint_path) {
  config.validate(net.n_sites());
  std::ifstream in(checkpoint_path);
  if (!in) throw std::runtime_error("cannot open checkpoint file: " + checkpoint_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint file " + checkpoint_path + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "scmnet-optimizer-checkpoint" ||
        doc.at("version").get<int>() != 1) {
      throw std::runtime_error("unrecognized checkpoint format in " + checkpoint_path);
    }
    if (doc.at("config_hash").get<std::uint64_t>() != config.hash()) {
      throw std::runtime_error("checkpoint " + checkpoint_path +
                               " was written with different optimizer settings");
    }
    const SplitRng root = SplitRng::from_key(doc.at("rng_key").get<std::uint64_t>(), 0);
    const int next_generation = doc.at("next_generation").get<int>();
    std::vector<Individual> pool;
    for (const json& j : doc.at("pool")) pool.push_back(individual_from_json(j));
    if (static_cast<int>(pool.size()) != config.pool_size) {
      throw std::runtime_error("checkpoint pool size does not match the configuration");
    }
    for (const Individual& ind : pool) {
      if (ind.genes.size() != 2 * static_cast<std::size_t>(net.n_sites())) {
        throw std::runtime_error("checkpoint chromosome length does not match the network");
      }
    }
    std::vector<GenerationStats> history;
    for (const json& j : doc.at("history")) {
      history.push_back({j.at("generation").get<int>(), j.at("best").get<double>(),
                         j.at("median").get<double>(), j.at("mean").get<double>()});
    }
    Individual best = individual_from_json(doc.at("best"));
    return run_loop(net, config, root, next_generation, std::move(pool), std::move(history),
                    std::move(best), checkpoint_path);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint file " + checkpoint_path + ": " + e.what());
  }
}

}  // namespace scmnet
