// Command-line front end: transport simulations, rate sweeps, noise
// optimization, and coupling reshuffling, all seed-deterministic with
// CSV/JSON artifacts plus a manifest per run.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scmnet/collision.hpp"
#include "scmnet/engine.hpp"
#include "scmnet/experiments.hpp"
#include "scmnet/genetic.hpp"
#include "scmnet/io.hpp"
#include "scmnet/lindblad.hpp"
#include "scmnet/metrics.hpp"
#include "scmnet/network.hpp"
#include "scmnet/propagation.hpp"
#include "scmnet/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scmnet;

namespace {

constexpr double kPi = 3.141592653589793;

// ---- JSON config files ------------------------------------------------------
// A config file is a JSON object whose keys mirror the long option names
// ("zeta-min", "ntraj", ...); arrays feed multi-value options. The file is
// expanded into argument tokens placed directly after the subcommand name, and
// every option keeps only its last occurrence, so explicit command-line flags
// always win over the file.

std::string config_scalar(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw std::runtime_error("config file " + path + " must hold a JSON object");
  }
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      tokens.push_back("--" + key);
      for (const auto& element : value) {
        if (element.is_array() || element.is_object()) {
          throw std::runtime_error("config file " + path + ": key '" + key +
                                   "' must hold scalars");
        }
        tokens.push_back(config_scalar(element));
      }
    } else if (value.is_object()) {
      throw std::runtime_error("config file " + path + ": key '" + key +
                               "' must not hold an object");
    } else {
      tokens.push_back("--" + key + "=" + config_scalar(value));
    }
  }
  return tokens;
}

/// Splice the contents of any --config file into the argument list right
/// after the subcommand name.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::size_t sub = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      sub = i;
      break;
    }
  }
  if (sub == args.size()) return args;  // no subcommand (--help / --version)
  std::vector<std::string> inserted;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    const std::vector<std::string> tokens = config_tokens(path);
    inserted.insert(inserted.end(), tokens.begin(), tokens.end());
  }
  args.insert(args.begin() + sub + 1, inserted.begin(), inserted.end());
  return args;
}

std::string config_path_sink;  // token consumed by expand_config_args already

void attach_config(CLI::App* cmd) {
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--config", config_path_sink,
                  "JSON config file; keys mirror the long option names");
}

// ---- shared option groups ---------------------------------------------------

struct NetworkOpts {
  std::string network = "fc";
  int nodes = 20;
  double coupling = 1.0;
  int initial = 1;  // 1-based on the command line
  int sink = 2;
  std::optional<double> gamma;
};

void add_network_options(CLI::App* cmd, NetworkOpts& o) {
  cmd->add_option("--network", o.network, "fc, fmo, fmo7, or a network JSON file")
      ->capture_default_str();
  cmd->add_option("--nodes", o.nodes, "node count (fc only)")->capture_default_str();
  cmd->add_option("--coupling", o.coupling, "uniform coupling g (fc only)")
      ->capture_default_str();
  cmd->add_option("--initial", o.initial, "initial node, 1-based (fc only)")
      ->capture_default_str();
  cmd->add_option("--sink", o.sink, "sink node, 1-based (fc only)")->capture_default_str();
  cmd->add_option("--gamma", o.gamma,
                  "sink absorption rate (defaults: 1 for fc, 50 for fmo/fmo7)");
}

ExcitationNetwork build_network(const NetworkOpts& o) {
  if (o.network == "fc") {
    return fully_connected(o.nodes, o.coupling, o.initial - 1, o.sink - 1,
                           o.gamma.value_or(1.0));
  }
  if (o.network == "fmo") return fmo_network(o.gamma.value_or(50.0));
  if (o.network == "fmo7") return fmo7_network(o.gamma.value_or(50.0));
  ExcitationNetwork net = load_network_json(o.network);
  if (o.gamma) net = net.with_sink_rate(*o.gamma);
  return net;
}

json network_config(const NetworkOpts& o, const ExcitationNetwork& net) {
  json j;
  j["network"] = o.network;
  j["nodes"] = net.n_sites();
  j["initial"] = net.initial_node() + 1;
  j["sink"] = net.sink_node() + 1;
  j["gamma"] = net.sink_rate();
  if (o.network == "fc") j["coupling"] = o.coupling;
  return j;
}

struct RunOpts {
  double theta = kPi / 2;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = ".";
  std::optional<double> tmax;
  int grid_points = 2000;
  long ntraj = 2000;
  double threshold = 0.95;
  bool gnuplot = false;
};

void add_run_options(CLI::App* cmd, RunOpts& o, long default_ntraj, bool tmax_required,
                     bool with_theta = true) {
  o.ntraj = default_ntraj;
  if (with_theta) {
    cmd->add_option("--theta", o.theta, "collision strength in radians")
        ->capture_default_str();
  }
  cmd->add_option("--seed", o.seed, "master RNG seed")->capture_default_str();
  cmd->add_option("--workers", o.workers, "worker threads (never changes results)")
      ->envname("SCMNET_WORKERS")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  auto* tmax = cmd->add_option("--tmax", o.tmax, "simulated time span");
  if (tmax_required) tmax->required();
  cmd->add_option("--grid-points", o.grid_points, "time grid resolution")
      ->capture_default_str();
  cmd->add_option("--ntraj", o.ntraj, "trajectories per ensemble")->capture_default_str();
  cmd->add_option("--threshold", o.threshold, "sink population defining arrival")
      ->capture_default_str();
  cmd->add_flag("--gnuplot", o.gnuplot, "also emit two-column plot files");
}

/// Without an explicit --tmax, simulate for 50 sink lifetimes.
double resolve_tmax(const RunOpts& o, const ExcitationNetwork& net) {
  if (o.tmax) return *o.tmax;
  if (net.sink_rate() <= 0.0) {
    throw std::invalid_argument("--tmax is required when the sink rate is 0");
  }
  return 50.0 / net.sink_rate();
}

PatternSpec parse_pattern(const std::string& text, const ExcitationNetwork& net) {
  PatternSpec pattern;
  if (text == "homogeneous") return pattern;
  if (text == "localized") {
    pattern.kind = NoisePattern::localized;
    return pattern;
  }
  if (text.rfind("mask=", 0) == 0) {
    pattern.kind = NoisePattern::mask;
    std::stringstream list(text.substr(5));
    std::string token;
    while (std::getline(list, token, ',')) {
      int node = 0;
      try {
        node = std::stoi(token);
      } catch (const std::exception&) {
        throw std::invalid_argument("--pattern mask: '" + token + "' is not a node index");
      }
      if (node < 1 || node > net.n_sites()) {
        throw std::invalid_argument("--pattern mask: node " + std::to_string(node) +
                                    " outside 1.." + std::to_string(net.n_sites()));
      }
      pattern.mask_nodes.push_back(node - 1);
    }
    if (pattern.mask_nodes.empty()) {
      throw std::invalid_argument("--pattern mask: needs at least one node");
    }
    return pattern;
  }
  throw std::invalid_argument("--pattern must be homogeneous, localized, or mask=1,4,...");
}

// ---- output helpers ---------------------------------------------------------

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> num_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  return row;
}

void write_dat(const fs::path& path, const std::string& comment,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# " << comment << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(row[i]);
    }
    out << '\n';
  }
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, const json& config,
                    const std::vector<ArtifactRecord>& artifacts) {
  json doc;
  doc["format"] = "scmnet-run-manifest";
  doc["version"] = 1;
  doc["tool_version"] = version_string;
  doc["subcommand"] = subcommand;
  doc["config"] = config;
  json list = json::array();
  for (const ArtifactRecord& a : artifacts) {
    list.push_back({{"name", a.name},
                    {"file", fs::path(a.path).filename().string()},
                    {"bytes", a.bytes},
                    {"fnv1a64", a.fnv1a64_hex}});
  }
  doc["artifacts"] = std::move(list);
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest.json in " + out_dir.string());
  out << doc.dump(2) << '\n';
}

json run_config(const RunOpts& o, double tmax) {
  json j;
  j["theta"] = o.theta;
  j["seed"] = o.seed;
  j["workers"] = o.workers;
  j["out"] = o.out;
  j["tmax"] = tmax;
  j["grid-points"] = o.grid_points;
  j["ntraj"] = o.ntraj;
  j["threshold"] = o.threshold;
  return j;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  NetworkOpts net;
  RunOpts run;
  std::string pattern = "homogeneous";
  double k = 1.0;
  double zeta = 0.0;
};

void run_simulate(const SimulateArgs& args) {
  const ExcitationNetwork net = build_network(args.net);
  const double tmax = resolve_tmax(args.run, net);
  const TimeGrid grid{tmax, args.run.grid_points};
  const PatternSpec pattern = parse_pattern(args.pattern, net);
  const NoiseProfile profile = pattern.build(net, args.k, args.zeta, args.run.theta);

  EnsembleOptions options;
  options.workers = args.run.workers;
  options.keep_batch_means = true;
  const EnsembleDynamics dynamics =
      simulate_ensemble(net, profile, grid, args.run.ntraj, args.run.seed, options);
  const EpsilonEstimate score = score_dynamics(dynamics, args.run.threshold);

  const fs::path dir = prepare_out_dir(args.run.out);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    rows.push_back(num_row({grid.time(i), dynamics.mean[i], dynamics.std_error[i]}));
  }
  write_csv_file((dir / "dynamics.csv").string(), {"time", "mean_sink", "std_error"}, rows);
  write_csv_file((dir / "summary.csv").string(),
                 {"epsilon", "epsilon_stderr", "reached", "t_star"},
                 {{format_double(score.epsilon), format_double(score.epsilon_se),
                   score.reached ? "1" : "0", format_double(score.t_star)}});

  std::vector<ArtifactRecord> artifacts{
      hash_artifact("dynamics", (dir / "dynamics.csv").string()),
      hash_artifact("summary", (dir / "summary.csv").string())};
  if (args.run.gnuplot) {
    std::vector<std::vector<double>> points;
    for (int i = 0; i < grid.n_points; ++i) points.push_back({grid.time(i), dynamics.mean[i]});
    write_dat(dir / "dynamics.dat", "time mean_sink", points);
    artifacts.push_back(hash_artifact("dynamics-plot", (dir / "dynamics.dat").string()));
  }

  json config = network_config(args.net, net);
  config.update(run_config(args.run, tmax));
  config["pattern"] = args.pattern;
  config["k"] = args.k;
  config["zeta"] = args.zeta;
  write_manifest(dir, "simulate", config, artifacts);
  std::cerr << "epsilon = " << format_double(score.epsilon) << " (reached = " << score.reached
            << ")\n";
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  NetworkOpts net;
  RunOpts run;
  std::string pattern = "homogeneous";
  std::vector<double> k_values{1.0};
  double zeta_min = 0.0;
  double zeta_max = 0.0;
  std::optional<int> zeta_points;
};

SweepSpec make_sweep_spec(const SweepArgs& args, const ExcitationNetwork& net, double tmax) {
  if (!(args.zeta_min > 0.0) || !(args.zeta_max >= args.zeta_min)) {
    throw std::invalid_argument("--zeta-min/--zeta-max must satisfy 0 < min <= max");
  }
  SweepSpec spec;
  spec.pattern = parse_pattern(args.pattern, net);
  spec.k_values = args.k_values;
  spec.theta = args.run.theta;
  const int points =
      args.zeta_points.value_or(default_zeta_points(args.zeta_min, args.zeta_max));
  spec.zeta_grid = log_spaced_grid(args.zeta_min, args.zeta_max, points);
  spec.sim.grid = TimeGrid{tmax, args.run.grid_points};
  spec.sim.n_traj = args.run.ntraj;
  spec.sim.threshold = args.run.threshold;
  spec.sim.workers = args.run.workers;
  spec.seed = args.run.seed;
  return spec;
}

json sweep_config(const SweepArgs& args, const SweepSpec& spec) {
  json j;
  j["pattern"] = args.pattern;
  j["k"] = args.k_values;
  j["zeta-min"] = args.zeta_min;
  j["zeta-max"] = args.zeta_max;
  j["zeta-points"] = static_cast<int>(spec.zeta_grid.size());
  return j;
}

void add_sweep_options(CLI::App* cmd, SweepArgs& args, bool with_theta = true) {
  add_network_options(cmd, args.net);
  add_run_options(cmd, args.run, 2000, /*tmax_required=*/true, with_theta);
  cmd->add_option("--pattern", args.pattern, "homogeneous, localized, or mask=1,4,...")
      ->capture_default_str();
  cmd->add_option("--k", args.k_values, "Weibull shape value(s)")->capture_default_str();
  cmd->add_option("--zeta-min", args.zeta_min, "lowest collision rate")->required();
  cmd->add_option("--zeta-max", args.zeta_max, "highest collision rate")->required();
  cmd->add_option("--zeta-points", args.zeta_points,
                  "zeta grid size (default: 60 per decade)");
}

void run_sweep_cmd(const SweepArgs& args) {
  const ExcitationNetwork net = build_network(args.net);
  const double tmax = resolve_tmax(args.run, net);
  const SweepSpec spec = make_sweep_spec(args, net, tmax);
  std::cerr << "sweep: " << spec.k_values.size() << " x " << spec.zeta_grid.size()
            << " points, " << spec.sim.n_traj << " trajectories each\n";
  const std::vector<SweepRow> rows = run_sweep(net, spec);

  const fs::path dir = prepare_out_dir(args.run.out);
  std::vector<std::vector<std::string>> csv;
  csv.reserve(rows.size());
  for (const SweepRow& row : rows) {
    csv.push_back(num_row({row.k, row.zeta, row.epsilon, row.epsilon_se}));
  }
  write_csv_file((dir / "sweep.csv").string(), {"k", "zeta", "epsilon", "epsilon_stderr"},
                 csv);
  std::vector<ArtifactRecord> artifacts{hash_artifact("sweep", (dir / "sweep.csv").string())};

  if (args.run.gnuplot) {
    for (std::size_t a = 0; a < spec.k_values.size(); ++a) {
      std::vector<std::vector<double>> points;
      for (const SweepRow& row : rows) {
        if (row.k == spec.k_values[a]) points.push_back({row.zeta, row.epsilon});
      }
      const fs::path path = dir / ("sweep_k" + std::to_string(a + 1) + ".dat");
      write_dat(path, "k = " + format_double(spec.k_values[a]) + "; zeta epsilon", points);
      artifacts.push_back(hash_artifact("sweep-plot-k" + std::to_string(a + 1), path.string()));
    }
  }

  json config = network_config(args.net, net);
  config.update(run_config(args.run, tmax));
  config.update(sweep_config(args, spec));
  write_manifest(dir, "sweep", config, artifacts);
}

// ---- theta sweep ------------------------------------------------------------

struct ThetaSweepArgs {
  SweepArgs sweep;
  std::vector<double> thetas;
};

void run_theta_sweep_cmd(const ThetaSweepArgs& args) {
  const ExcitationNetwork net = build_network(args.sweep.net);
  const double tmax = resolve_tmax(args.sweep.run, net);
  const SweepSpec spec = make_sweep_spec(args.sweep, net, tmax);
  std::cerr << "theta-sweep: " << args.thetas.size() << " theta values\n";
  const ThetaSweepResult result = run_theta_sweep(net, spec, args.thetas);

  const fs::path dir = prepare_out_dir(args.sweep.run.out);
  std::vector<std::vector<std::string>> csv;
  csv.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    csv.push_back(num_row({row.theta, row.k, row.zeta, row.epsilon, row.epsilon_se}));
  }
  write_csv_file((dir / "theta_sweep.csv").string(),
                 {"theta", "k", "zeta", "epsilon", "epsilon_stderr"}, csv);
  std::vector<std::vector<std::string>> peaks;
  peaks.reserve(result.peaks.size());
  for (const auto& peak : result.peaks) {
    peaks.push_back(num_row({peak.theta, peak.k, peak.zeta, peak.epsilon}));
  }
  write_csv_file((dir / "theta_peaks.csv").string(),
                 {"theta", "k", "zeta_peak", "epsilon_peak"}, peaks);

  std::vector<ArtifactRecord> artifacts{
      hash_artifact("theta-sweep", (dir / "theta_sweep.csv").string()),
      hash_artifact("theta-peaks", (dir / "theta_peaks.csv").string())};
  if (args.sweep.run.gnuplot) {
    for (std::size_t t = 0; t < args.thetas.size(); ++t) {
      std::vector<std::vector<double>> points;
      for (const auto& row : result.rows) {
        if (row.theta == args.thetas[t] && row.k == spec.k_values.front()) {
          points.push_back({row.zeta, row.epsilon});
        }
      }
      const fs::path path = dir / ("theta_sweep_t" + std::to_string(t + 1) + ".dat");
      write_dat(path, "theta = " + format_double(args.thetas[t]) + "; zeta epsilon", points);
      artifacts.push_back(
          hash_artifact("theta-plot-t" + std::to_string(t + 1), path.string()));
    }
  }

  json config = network_config(args.sweep.net, net);
  config.update(run_config(args.sweep.run, tmax));
  config.update(sweep_config(args.sweep, spec));
  config["theta"] = args.thetas;
  write_manifest(dir, "theta-sweep", config, artifacts);
}

// ---- optimize ---------------------------------------------------------------

struct OptimizeArgs {
  NetworkOpts net;
  RunOpts run;
  int pool = 40;
  int generations = 200;
  int plateau_window = 10;
  double plateau_tol = 1e-4;
  std::string mutation = "hybrid";
  double mutation_scale = 0.25;
  std::optional<double> zeta_min;
  std::optional<double> zeta_max;
  double k_min = 0.3;
  double k_max = 30.0;
  std::string checkpoint;
  bool resume = false;
};

MutationMode parse_mutation(const std::string& text) {
  if (text == "additive") return MutationMode::additive;
  if (text == "multiplicative") return MutationMode::multiplicative;
  if (text == "hybrid") return MutationMode::hybrid;
  throw std::invalid_argument("--mutation must be additive, multiplicative, or hybrid");
}

void run_optimize_cmd(const OptimizeArgs& args) {
  const ExcitationNetwork net = build_network(args.net);
  const double tmax = resolve_tmax(args.run, net);
  const fs::path dir = prepare_out_dir(args.run.out);

  GeneticConfig config;
  config.pool_size = args.pool;
  config.parent_count = args.pool / 2;
  config.mutation_mode = parse_mutation(args.mutation);
  config.additive_scale = args.mutation_scale;
  config.multiplicative_scale = args.mutation_scale;
  config.plateau_window = args.plateau_window;
  config.plateau_tol = args.plateau_tol;
  config.max_generations = args.generations;
  config.bounds = default_gene_bounds(net);
  if (args.zeta_min) config.bounds.zeta_min = *args.zeta_min;
  if (args.zeta_max) config.bounds.zeta_max = *args.zeta_max;
  config.bounds.k_min = args.k_min;
  config.bounds.k_max = args.k_max;
  config.fitness.grid = TimeGrid{tmax, args.run.grid_points};
  config.fitness.n_traj = args.run.ntraj;
  config.fitness.theta = args.run.theta;
  config.fitness.threshold = args.run.threshold;
  config.fitness.workers = args.run.workers;

  const std::string checkpoint =
      args.checkpoint.empty() ? (dir / "checkpoint.json").string() : args.checkpoint;
  const GeneticResult result =
      args.resume ? resume_genetic(net, config, checkpoint)
                  : run_genetic(net, config, args.run.seed, checkpoint);
  std::cerr << "optimize: " << result.generations_run << " generations, best epsilon = "
            << format_double(result.best.fitness)
            << (result.plateaued ? " (plateau)\n" : " (generation cap)\n");

  std::vector<std::vector<std::string>> gen_rows;
  gen_rows.reserve(result.history.size());
  for (const GenerationStats& s : result.history) {
    gen_rows.push_back({std::to_string(s.generation), format_double(s.best),
                        format_double(s.median), format_double(s.mean)});
  }
  write_csv_file((dir / "generations.csv").string(), {"generation", "best", "median", "mean"},
                 gen_rows);

  const int n = net.n_sites();
  std::vector<std::string> pool_header{"individual", "fitness"};
  for (int i = 0; i < n; ++i) pool_header.push_back("zeta_" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) pool_header.push_back("k_" + std::to_string(i + 1));
  std::vector<std::vector<std::string>> pool_rows;
  pool_rows.reserve(result.final_pool.size());
  for (std::size_t i = 0; i < result.final_pool.size(); ++i) {
    const Individual& ind = result.final_pool[i];
    std::vector<std::string> row{std::to_string(i + 1), format_double(ind.fitness)};
    for (double gene : ind.genes) row.push_back(format_double(gene));
    pool_rows.push_back(std::move(row));
  }
  write_csv_file((dir / "pool.csv").string(), pool_header, pool_rows);

  std::vector<std::vector<std::string>> summary_rows;
  for (const ParamSummary& s : summarize_pool(result.final_pool, n)) {
    summary_rows.push_back({s.name, format_double(s.min), format_double(s.q1),
                            format_double(s.median), format_double(s.q3),
                            format_double(s.max)});
  }
  write_csv_file((dir / "summary.csv").string(), {"parameter", "min", "q1", "median", "q3", "max"},
                 summary_rows);

  NoiseProfile best_profile;
  best_profile.rate = Eigen::VectorXd(n);
  best_profile.shape = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) {
    best_profile.rate(i) = result.best.genes[i];
    best_profile.shape(i) = result.best.genes[n + i];
  }
  best_profile.theta = args.run.theta;
  save_noise_profile_json((dir / "best_profile.json").string(), best_profile);

  std::vector<ArtifactRecord> artifacts{
      hash_artifact("generations", (dir / "generations.csv").string()),
      hash_artifact("pool", (dir / "pool.csv").string()),
      hash_artifact("summary", (dir / "summary.csv").string()),
      hash_artifact("best-profile", (dir / "best_profile.json").string())};
  if (args.run.gnuplot) {
    std::vector<std::vector<double>> points;
    for (const GenerationStats& s : result.history) {
      points.push_back({static_cast<double>(s.generation), s.best, s.median});
    }
    write_dat(dir / "generations.dat", "generation best median", points);
    artifacts.push_back(hash_artifact("generations-plot", (dir / "generations.dat").string()));
  }

  json config_json = network_config(args.net, net);
  config_json.update(run_config(args.run, tmax));
  config_json["pool"] = args.pool;
  config_json["generations"] = args.generations;
  config_json["plateau-window"] = args.plateau_window;
  config_json["plateau-tol"] = args.plateau_tol;
  config_json["mutation"] = args.mutation;
  config_json["mutation-scale"] = args.mutation_scale;
  config_json["zeta-min"] = config.bounds.zeta_min;
  config_json["zeta-max"] = config.bounds.zeta_max;
  config_json["k-min"] = config.bounds.k_min;
  config_json["k-max"] = config.bounds.k_max;
  config_json["checkpoint"] = checkpoint;
  config_json["resume"] = args.resume;
  write_manifest(dir, "optimize", config_json, artifacts);
}

// ---- reshuffle --------------------------------------------------------------

struct ReshuffleArgs {
  NetworkOpts net;
  RunOpts run;
  long samples = 500;
  double k = 1.0;
  std::optional<double> zeta;
  std::string profile_file;
};

void run_reshuffle_cmd(const ReshuffleArgs& args) {
  const ExcitationNetwork net = build_network(args.net);
  const double tmax = resolve_tmax(args.run, net);

  NoiseProfile profile;
  if (!args.profile_file.empty()) {
    profile = load_noise_profile_json(args.profile_file);
    if (profile.n_sites() != net.n_sites()) {
      throw std::invalid_argument("profile in " + args.profile_file + " has " +
                                  std::to_string(profile.n_sites()) + " nodes, network has " +
                                  std::to_string(net.n_sites()));
    }
  } else {
    if (!args.zeta) {
      throw std::invalid_argument("reshuffle needs either --zeta or --profile");
    }
    profile = NoiseProfile::homogeneous(net.n_sites(), args.k, *args.zeta, args.run.theta);
  }

  ReshuffleSpec spec;
  spec.samples = args.samples;
  spec.profile = profile;
  spec.sim.grid = TimeGrid{tmax, args.run.grid_points};
  spec.sim.n_traj = args.run.ntraj;
  spec.sim.threshold = args.run.threshold;
  spec.sim.workers = args.run.workers;
  spec.seed = args.run.seed;
  std::cerr << "reshuffle: " << spec.samples << " samples, " << spec.sim.n_traj
            << " trajectories each\n";
  const ReshuffleResult result = run_reshuffle(net, spec);

  const fs::path dir = prepare_out_dir(args.run.out);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.epsilons.size());
  for (std::size_t m = 0; m < result.epsilons.size(); ++m) {
    rows.push_back({std::to_string(m + 1), format_double(result.epsilons[m])});
  }
  write_csv_file((dir / "reshuffle.csv").string(), {"sample", "epsilon"}, rows);

  // fixed-width histogram over [0, max]
  const double top = *std::max_element(result.epsilons.begin(), result.epsilons.end());
  const int bins = 50;
  const double width = top > 0.0 ? top / bins : 1.0;
  std::vector<long> counts(bins, 0);
  for (double eps : result.epsilons) {
    int b = top > 0.0 ? static_cast<int>(eps / width) : 0;
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  std::vector<std::vector<std::string>> hist_rows;
  for (int b = 0; b < bins; ++b) {
    hist_rows.push_back({format_double(b * width), format_double((b + 1) * width),
                         std::to_string(counts[b])});
  }
  write_csv_file((dir / "histogram.csv").string(), {"bin_lo", "bin_hi", "count"}, hist_rows);
  write_csv_file((dir / "summary.csv").string(),
                 {"baseline_epsilon", "outperform_fraction", "samples"},
                 {{format_double(result.baseline_epsilon),
                   format_double(result.outperform_fraction), std::to_string(spec.samples)}});

  std::vector<ArtifactRecord> artifacts{
      hash_artifact("reshuffle", (dir / "reshuffle.csv").string()),
      hash_artifact("histogram", (dir / "histogram.csv").string()),
      hash_artifact("summary", (dir / "summary.csv").string())};
  if (args.run.gnuplot) {
    std::vector<std::vector<double>> points;
    for (int b = 0; b < bins; ++b) {
      points.push_back({(b + 0.5) * width, static_cast<double>(counts[b])});
    }
    write_dat(dir / "histogram.dat", "epsilon_bin_center count", points);
    artifacts.push_back(hash_artifact("histogram-plot", (dir / "histogram.dat").string()));
  }

  json config = network_config(args.net, net);
  config.update(run_config(args.run, tmax));
  config["samples"] = args.samples;
  config["k"] = args.k;
  if (args.zeta) config["zeta"] = *args.zeta;
  config["profile"] = args.profile_file;
  write_manifest(dir, "reshuffle", config, artifacts);
  std::cerr << "baseline epsilon = " << format_double(result.baseline_epsilon)
            << ", outperform fraction = " << format_double(result.outperform_fraction) << '\n';
}

// ---- validate ---------------------------------------------------------------

struct ValidateArgs {
  RunOpts run;
};

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

CheckResult check_collision_channel() {
  SplitRng rng(20240817);
  const int n = 3;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // random density matrix: normalized A A^dagger
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = std::complex<double>(rng.normal(), rng.normal());
    }
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho /= rho.trace().real();
    const int node = static_cast<int>(rng.below(n));
    const double theta = rng.uniform() * 2.0 * kPi;

    // reference: exact Kraus pair K = exp(-i theta/2 Z_node) / sqrt(2)
    Eigen::VectorXcd z = Eigen::VectorXcd::Ones(n);
    z(node) = -1.0;
    const Eigen::MatrixXcd u =
        Eigen::MatrixXcd((std::complex<double>(0.0, -theta / 2.0) * z.array())
                             .exp()
                             .matrix()
                             .asDiagonal());
    const Eigen::MatrixXcd expected = 0.5 * (u * rho * u.adjoint() + u.adjoint() * rho * u);

    Eigen::MatrixXcd actual = rho;
    apply_collision_in_place(actual, node, theta);
    worst = std::max(worst, (actual - expected).cwiseAbs().maxCoeff());
  }
  return {"collision-channel-oracle", worst < 1e-12, "max deviation " + format_double(worst)};
}

CheckResult check_fc_analytics() {
  const int n = 5;
  const double g = 1.0;
  const ExcitationNetwork net = fully_connected(n, g, 0, 1, 0.0);
  const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.12 * i;
    const DensityMatrix rho = evolve(DensityMatrix::pure_site(n, net.initial_node()), h, t);
    for (int node = 0; node < n; ++node) {
      const double analytic = analytic_fc_population(n, g, t, net.initial_node(), node);
      worst = std::max(worst, std::abs(rho.mat()(node, node).real() - analytic));
    }
  }
  return {"fc-free-evolution-analytic", worst < 1e-10, "max deviation " + format_double(worst)};
}

CheckResult check_fc_trapping() {
  const int n = 20;
  const ExcitationNetwork net = fully_connected(n, 1.0, 0, 1, 1.0);
  const TimeGrid grid{500.0, 2000};
  const SplitRng stream = SplitRng(1).split(0);
  const std::vector<double> sink =
      simulate_trajectory(net, NoiseProfile::none(n), grid, stream);
  const double bound = 1.0 / (n - 1) + 1e-6;
  return {"fc-noiseless-trapping", sink.back() <= bound,
          "long-time sink " + format_double(sink.back()) + " vs bound " + format_double(bound)};
}

CheckResult check_weibull_moments() {
  SplitRng rng(7);
  bool ok = true;
  std::string detail;
  for (double k : {0.5, 1.0, 2.0, 10.0}) {
    const double lambda = 2.0;
    const long draws = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < draws; ++i) {
      const double x = sample_weibull_interval(k, lambda, rng);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / draws;
    const double var = (sumsq - draws * mean * mean) / (draws - 1);
    const double mean_ref = lambda * std::tgamma(1.0 + 1.0 / k);
    const double var_ref =
        lambda * lambda *
        (std::tgamma(1.0 + 2.0 / k) - std::pow(std::tgamma(1.0 + 1.0 / k), 2));
    const double mean_sigma = std::sqrt(var_ref / draws);
    if (std::abs(mean - mean_ref) > 4.0 * mean_sigma || std::abs(var - var_ref) > 0.05 * var_ref) {
      ok = false;
      detail += "k=" + format_double(k) + " off; ";
    }
  }
  if (detail.empty()) detail = "means and variances within tolerance";
  return {"weibull-moments", ok, detail};
}

CheckResult check_lindblad_crosscheck(long n_traj, int workers) {
  const int n = 6;
  const ExcitationNetwork net = fully_connected(n, 1.0, 0, 1, 1.0);
  const double zeta = 1.0;
  const NoiseProfile profile = NoiseProfile::homogeneous(n, 1.0, zeta, kPi / 2);
  const TimeGrid grid{30.0, 301};

  EnsembleOptions options;
  options.workers = workers;
  const EnsembleDynamics scm = simulate_ensemble(net, profile, grid, n_traj, 99, options);
  const std::vector<double> reference =
      integrate_lindblad(net, profile.rate, profile.theta, grid);
  double worst = 0.0;
  for (int i = 0; i < grid.n_points; ++i) {
    worst = std::max(worst, std::abs(scm.mean[i] - reference[i]));
  }
  return {"markovian-crosscheck", worst < 0.025,
          "max |SCM - master equation| = " + format_double(worst)};
}

void run_validate(const ValidateArgs& args) {
  std::vector<CheckResult> results;
  results.push_back(check_collision_channel());
  results.push_back(check_fc_analytics());
  results.push_back(check_fc_trapping());
  results.push_back(check_weibull_moments());
  results.push_back(check_lindblad_crosscheck(args.run.ntraj, args.run.workers));

  bool all_ok = true;
  std::vector<std::vector<std::string>> rows;
  for (const CheckResult& r : results) {
    all_ok = all_ok && r.passed;
    std::cout << (r.passed ? "ok   " : "FAIL ") << r.name << ": " << r.detail << '\n';
    rows.push_back({r.name, r.passed ? "pass" : "fail", r.detail});
  }
  const fs::path dir = prepare_out_dir(args.run.out);
  write_csv_file((dir / "validate.csv").string(), {"check", "status", "detail"}, rows);
  write_manifest(dir, "validate", json{{"ntraj", args.run.ntraj}, {"out", args.run.out}},
                 {hash_artifact("validate", (dir / "validate.csv").string())});
  if (!all_ok) throw std::runtime_error("validation checks failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic collision model transport simulator"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(1);

  SimulateArgs simulate_args;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "ensemble-averaged sink dynamics at one noise setting");
  attach_config(simulate_cmd);
  add_network_options(simulate_cmd, simulate_args.net);
  add_run_options(simulate_cmd, simulate_args.run, 2000, /*tmax_required=*/false);
  simulate_cmd->add_option("--pattern", simulate_args.pattern,
                           "homogeneous, localized, or mask=1,4,...")
      ->capture_default_str();
  simulate_cmd->add_option("--k", simulate_args.k, "Weibull shape")->capture_default_str();
  simulate_cmd->add_option("--zeta", simulate_args.zeta, "mean collision rate (0 = noiseless)")
      ->capture_default_str();
  simulate_cmd->callback([&] { run_simulate(simulate_args); });

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "performance epsilon over a zeta grid");
  attach_config(sweep_cmd);
  add_sweep_options(sweep_cmd, sweep_args);
  sweep_cmd->callback([&] { run_sweep_cmd(sweep_args); });

  ThetaSweepArgs theta_args;
  auto* theta_cmd =
      app.add_subcommand("theta-sweep", "zeta sweeps repeated across collision strengths");
  attach_config(theta_cmd);
  add_sweep_options(theta_cmd, theta_args.sweep, /*with_theta=*/false);
  theta_cmd->add_option("--theta", theta_args.thetas, "collision strengths in radians")
      ->required()
      ->expected(1, -1);
  theta_cmd->callback([&] { run_theta_sweep_cmd(theta_args); });

  OptimizeArgs optimize_args;
  auto* optimize_cmd =
      app.add_subcommand("optimize", "genetic search over per-node noise parameters");
  attach_config(optimize_cmd);
  add_network_options(optimize_cmd, optimize_args.net);
  add_run_options(optimize_cmd, optimize_args.run, 500, /*tmax_required=*/true);
  optimize_cmd->add_option("--pool", optimize_args.pool, "population size")
      ->capture_default_str();
  optimize_cmd->add_option("--generations", optimize_args.generations, "generation cap")
      ->capture_default_str();
  optimize_cmd
      ->add_option("--plateau-window", optimize_args.plateau_window,
                   "generations without improvement before stopping")
      ->capture_default_str();
  optimize_cmd->add_option("--plateau-tol", optimize_args.plateau_tol,
                           "improvement counting as progress")
      ->capture_default_str();
  optimize_cmd
      ->add_option("--mutation", optimize_args.mutation,
                   "additive, multiplicative, or hybrid")
      ->capture_default_str();
  optimize_cmd->add_option("--mutation-scale", optimize_args.mutation_scale,
                           "Gaussian sigma for mutations")
      ->capture_default_str();
  optimize_cmd->add_option("--zeta-min", optimize_args.zeta_min,
                           "lower rate bound (default: 0.01 x typical coupling)");
  optimize_cmd->add_option("--zeta-max", optimize_args.zeta_max,
                           "upper rate bound (default: 1000 x typical coupling)");
  optimize_cmd->add_option("--k-min", optimize_args.k_min, "lower shape bound")
      ->capture_default_str();
  optimize_cmd->add_option("--k-max", optimize_args.k_max, "upper shape bound")
      ->capture_default_str();
  optimize_cmd->add_option("--checkpoint", optimize_args.checkpoint,
                           "checkpoint path (default: <out>/checkpoint.json)");
  optimize_cmd->add_flag("--resume", optimize_args.resume, "continue from the checkpoint");
  optimize_cmd->callback([&] { run_optimize_cmd(optimize_args); });

  ReshuffleArgs reshuffle_args;
  auto* reshuffle_cmd =
      app.add_subcommand("reshuffle", "epsilon distribution over reshuffled couplings");
  attach_config(reshuffle_cmd);
  add_network_options(reshuffle_cmd, reshuffle_args.net);
  add_run_options(reshuffle_cmd, reshuffle_args.run, 2000, /*tmax_required=*/true);
  reshuffle_cmd->add_option("--samples", reshuffle_args.samples, "number of reshuffled networks")
      ->capture_default_str();
  reshuffle_cmd->add_option("--k", reshuffle_args.k, "Weibull shape for homogeneous noise")
      ->capture_default_str();
  reshuffle_cmd->add_option("--zeta", reshuffle_args.zeta,
                            "homogeneous collision rate (alternative to --profile)");
  reshuffle_cmd->add_option("--profile", reshuffle_args.profile_file,
                            "noise profile JSON (e.g. an optimizer's best_profile.json)");
  reshuffle_cmd->callback([&] { run_reshuffle_cmd(reshuffle_args); });

  ValidateArgs validate_args;
  auto* validate_cmd =
      app.add_subcommand("validate", "run the built-in physics and sampler cross-checks");
  attach_config(validate_cmd);
  add_run_options(validate_cmd, validate_args.run, 2000, /*tmax_required=*/false);
  validate_cmd->callback([&] { run_validate(validate_args); });

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
