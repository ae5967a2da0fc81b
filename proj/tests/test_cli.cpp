#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scmnet/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBase = "/tmp/scmnet_cli_tests";

int run_cli(const std::string& args, const std::string& log_name = "log.txt") {
  const std::string log = kBase + "/" + log_name;
  const std::string cmd = std::string(SCMNET_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = kBase + "/" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Once {
  Once() { fs::create_directories(kBase); }
} once;

}  // namespace

TEST_CASE("version and help exit cleanly; bad invocations do not") {
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("--help") == 0);
  CHECK(slurp(kBase + "/log.txt").find("simulate") != std::string::npos);
  CHECK(run_cli("") != 0);                           // a subcommand is required
  CHECK(run_cli("simulate --no-such-flag") != 0);
  CHECK(run_cli("explode") != 0);
  CHECK(run_cli("simulate --network fc --nodes 1 --tmax 5 --out " + kBase + "/bad") != 0);
}

TEST_CASE("simulate writes consistent, manifest-verified artifacts") {
  const std::string dir = fresh_dir("simulate");
  const int rc = run_cli("simulate --network fc --nodes 4 --gamma 1 --zeta 2 --k 1 --tmax 20 "
                         "--grid-points 101 --ntraj 16 --seed 7 --gnuplot --out " + dir,
                         "simulate.txt");
  REQUIRE(rc == 0);
  CHECK(slurp(kBase + "/simulate.txt").find("epsilon = ") != std::string::npos);

  const auto dynamics = scmnet::parse_csv_file(dir + "/dynamics.csv");
  REQUIRE(dynamics.size() == 102);  // header + one row per grid point
  CHECK(dynamics[0] == std::vector<std::string>{"time", "mean_sink", "std_error"});
  CHECK(dynamics[1][0] == "0");
  CHECK(dynamics[1][1] == "0");

  const auto summary = scmnet::parse_csv_file(dir + "/summary.csv");
  REQUIRE(summary.size() == 2);
  CHECK(summary[0] ==
        std::vector<std::string>{"epsilon", "epsilon_stderr", "reached", "t_star"});
  CHECK(summary[1][2] == "1");
  CHECK(std::stod(summary[1][0]) > 0.0);

  CHECK(fs::exists(dir + "/dynamics.dat"));
  CHECK(slurp(dir + "/dynamics.dat").rfind("# time mean_sink", 0) == 0);

  const json manifest = json::parse(slurp(dir + "/manifest.json"));
  CHECK(manifest.at("format") == "scmnet-run-manifest");
  CHECK(manifest.at("subcommand") == "simulate");
  CHECK(manifest.at("config").at("ntraj") == 16);
  CHECK(manifest.at("config").at("zeta") == 2.0);
  CHECK(manifest.at("config").at("workers") == 1);
  REQUIRE(manifest.at("artifacts").size() == 3);
  for (const json& entry : manifest.at("artifacts")) {
    const auto rec = scmnet::hash_artifact(entry.at("name"),
                                           dir + "/" + entry.at("file").get<std::string>());
    CHECK(entry.at("bytes").get<std::uint64_t>() == rec.bytes);
    CHECK(entry.at("fnv1a64").get<std::string>() == rec.fnv1a64_hex);
  }
}

TEST_CASE("the worker count changes throughput, never bytes") {
  const std::string base = "simulate --network fc --nodes 4 --gamma 1 --zeta 2 --k 1 --tmax 10 "
                           "--grid-points 51 --ntraj 64 --seed 9 --out ";
  const std::string d1 = fresh_dir("workers1");
  const std::string d2 = fresh_dir("workers2");
  REQUIRE(run_cli(base + d1 + " --workers 1") == 0);
  REQUIRE(run_cli(base + d2 + " --workers 2") == 0);
  CHECK(slurp(d1 + "/dynamics.csv") == slurp(d2 + "/dynamics.csv"));
  CHECK(slurp(d1 + "/summary.csv") == slurp(d2 + "/summary.csv"));

  // the environment variable supplies the default worker count
  const std::string d3 = fresh_dir("workers_env");
  const std::string cmd = std::string("SCMNET_WORKERS=2 ") + SCMNET_CLI_PATH + " " + base + d3 +
                          " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const json manifest = json::parse(slurp(d3 + "/manifest.json"));
  CHECK(manifest.at("config").at("workers") == 2);
  CHECK(slurp(d1 + "/dynamics.csv") == slurp(d3 + "/dynamics.csv"));
}

TEST_CASE("config files mirror the flags and explicit flags win") {
  const std::string dir = fresh_dir("config");
  const std::string cfg = dir + "/run.json";
  std::ofstream(cfg) << R"({"zeta": 2.0, "ntraj": 8, "tmax": 10.0, "grid-points": 51})";
  const int rc = run_cli("simulate --config " + cfg +
                         " --network fc --nodes 4 --gamma 1 --ntraj 16 --seed 7 --out " + dir);
  REQUIRE(rc == 0);
  const json manifest = json::parse(slurp(dir + "/manifest.json"));
  CHECK(manifest.at("config").at("zeta") == 2.0);    // from the config file
  CHECK(manifest.at("config").at("tmax") == 10.0);   // from the config file
  CHECK(manifest.at("config").at("ntraj") == 16);    // flag overrides config

  std::ofstream(cfg) << R"(["not", "an", "object"])";
  CHECK(run_cli("simulate --config " + cfg + " --network fc --nodes 4 --tmax 5 --out " + dir) !=
        0);
}

TEST_CASE("sweep covers the full k x zeta grid and writes plot files on request") {
  const std::string dir = fresh_dir("sweep");
  const int rc = run_cli("sweep --network fc --nodes 4 --gamma 1 --k 0.5 --k 2 "
                         "--zeta-min 0.5 --zeta-max 2 --zeta-points 3 --tmax 5 "
                         "--grid-points 51 --ntraj 8 --seed 3 --gnuplot --out " + dir);
  REQUIRE(rc == 0);
  const auto rows = scmnet::parse_csv_file(dir + "/sweep.csv");
  REQUIRE(rows.size() == 7);  // header + 2 k-values x 3 zeta points
  CHECK(rows[0] == std::vector<std::string>{"k", "zeta", "epsilon", "epsilon_stderr"});
  CHECK(rows[1][0] == "0.5");
  CHECK(rows[4][0] == "2");
  CHECK(rows[1][1] == "0.5");
  CHECK(rows[3][1] == "2");
  CHECK(fs::exists(dir + "/sweep_k1.dat"));
  CHECK(fs::exists(dir + "/sweep_k2.dat"));

  // omitting the required rate range is an error
  CHECK(run_cli("sweep --network fc --nodes 4 --tmax 5 --out " + dir) != 0);
}

TEST_CASE("theta-sweep honours every angle given") {
  const std::string dir = fresh_dir("theta_sweep");
  const int rc = run_cli("theta-sweep --network fc --nodes 4 --gamma 1 --theta 1.0 --theta 2.2 "
                         "--zeta-min 0.5 --zeta-max 2 --zeta-points 2 --tmax 5 "
                         "--grid-points 51 --ntraj 8 --seed 3 --out " + dir);
  REQUIRE(rc == 0);
  const auto rows = scmnet::parse_csv_file(dir + "/theta_sweep.csv");
  REQUIRE(rows.size() == 5);  // header + 2 thetas x 2 zeta points
  CHECK(rows[1][0] == "1");
  CHECK(rows[3][0] == "2.2");
  const auto peaks = scmnet::parse_csv_file(dir + "/theta_peaks.csv");
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[0] == std::vector<std::string>{"theta", "k", "zeta_peak", "epsilon_peak"});
}

TEST_CASE("optimize writes the population, summary and a resumable checkpoint") {
  const std::string dir = fresh_dir("optimize");
  const std::string cmd = "optimize --network fc --nodes 4 --gamma 1 --pool 6 --generations 2 "
                          "--ntraj 10 --tmax 5 --grid-points 51 --seed 3 --gnuplot --out " + dir;
  REQUIRE(run_cli(cmd) == 0);

  const auto generations = scmnet::parse_csv_file(dir + "/generations.csv");
  REQUIRE(generations.size() == 3);  // header + 2 generations
  CHECK(generations[0] == std::vector<std::string>{"generation", "best", "median", "mean"});
  CHECK(generations[1][0] == "0");
  CHECK(generations[2][0] == "1");
  CHECK(std::stod(generations[2][1]) >= std::stod(generations[1][1]));

  const auto pool = scmnet::parse_csv_file(dir + "/pool.csv");
  REQUIRE(pool.size() == 7);     // header + 6 individuals
  REQUIRE(pool[0].size() == 10);  // index, fitness, 8 genes
  CHECK(pool[0][0] == "individual");
  CHECK(pool[0][2] == "zeta_1");
  CHECK(pool[0][6] == "k_1");

  const auto summary = scmnet::parse_csv_file(dir + "/summary.csv");
  REQUIRE(summary.size() == 9);  // header + 2 genes per node
  CHECK(summary[0] ==
        std::vector<std::string>{"parameter", "min", "q1", "median", "q3", "max"});
  CHECK(summary[1][0] == "zeta_1");
  CHECK(summary[5][0] == "k_1");

  const scmnet::NoiseProfile best = scmnet::load_noise_profile_json(dir + "/best_profile.json");
  CHECK(best.n_sites() == 4);

  REQUIRE(fs::exists(dir + "/checkpoint.json"));
  CHECK(run_cli(cmd + " --resume") == 0);  // picking a finished run back up is a no-op
}

TEST_CASE("reshuffle reports the epsilon distribution and strict-win fraction") {
  const std::string dir = fresh_dir("reshuffle");
  const int rc = run_cli("reshuffle --network fc --nodes 4 --gamma 1 --samples 3 --zeta 2 "
                         "--k 1 --tmax 10 --grid-points 51 --ntraj 8 --seed 5 --out " + dir);
  REQUIRE(rc == 0);
  const auto rows = scmnet::parse_csv_file(dir + "/reshuffle.csv");
  REQUIRE(rows.size() == 4);  // header + 3 samples
  CHECK(rows[0] == std::vector<std::string>{"sample", "epsilon"});
  CHECK(fs::exists(dir + "/histogram.csv"));
  const auto summary = scmnet::parse_csv_file(dir + "/summary.csv");
  REQUIRE(summary.size() == 2);
  CHECK(summary[0] ==
        std::vector<std::string>{"baseline_epsilon", "outperform_fraction", "samples"});
  // uniform couplings: every reshuffle ties the baseline, no strict wins
  CHECK(summary[1][1] == "0");
  CHECK(summary[1][2] == "3");
}

TEST_CASE("validate passes its built-in cross-checks") {
  const std::string dir = fresh_dir("validate");
  REQUIRE(run_cli("validate --out " + dir, "validate.txt") == 0);
  const auto rows = scmnet::parse_csv_file(dir + "/validate.csv");
  REQUIRE(rows.size() >= 5);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] == "pass");
}
