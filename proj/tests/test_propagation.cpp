#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "scmnet/collision.hpp"
#include "scmnet/density_matrix.hpp"
#include "scmnet/network.hpp"
#include "scmnet/propagation.hpp"

using scmnet::analytic_fc_population;
using scmnet::DensityMatrix;
using scmnet::evolve;
using scmnet::fully_connected;
using scmnet::matrix_exponential;
using scmnet::NumericError;
using scmnet::Propagator;
using scmnet::single_excitation_hamiltonian;
using scmnet::unprotected_population;

namespace {
constexpr std::complex<double> kMinusI{0.0, -1.0};

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("matrix exponential of zero is the identity") {
  const Eigen::MatrixXcd e = matrix_exponential(Eigen::MatrixXcd::Zero(4, 4));
  CHECK(max_abs_diff(e, Eigen::MatrixXcd::Identity(4, 4)) < 1e-14);
}

TEST_CASE("matrix exponential of a diagonal matrix exponentiates the diagonal") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = {0.3, -1.2};
  d(1, 1) = {-2.0, 0.7};
  d(2, 2) = {1.5, 3.0};
  const Eigen::MatrixXcd e = matrix_exponential(d);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(e(i, i) - std::exp(d(i, i))) < 1e-12);
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(e(i, j)) < 1e-13);
  }
}

TEST_CASE("matrix exponential matches a long Taylor series on random matrices") {
  std::mt19937_64 gen(123);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd m(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) = std::complex<double>(normal(gen), normal(gen));
    const Eigen::MatrixXcd fast = matrix_exponential(m);
    const Eigen::MatrixXcd slow = oracle::taylor_expm(m);
    CHECK(max_abs_diff(fast, slow) / slow.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("matrix exponential inverts cleanly and rejects bad input") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = std::complex<double>(normal(gen), normal(gen));
  CHECK(max_abs_diff(matrix_exponential(m) * matrix_exponential(-m),
                     Eigen::MatrixXcd::Identity(4, 4)) < 1e-11);

  Eigen::MatrixXcd bad = m;
  bad(1, 2) = std::nan("");
  CHECK_THROWS_AS(matrix_exponential(bad), NumericError);
}

TEST_CASE("zero-time evolution is the identity") {
  const auto net = fully_connected(5, 1.0, 0, 1, 0.3);
  const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
  const DensityMatrix rho = DensityMatrix::pure_site(5, 0);
  const DensityMatrix out = evolve(rho, h, 0.0);
  CHECK(max_abs_diff(out.mat(), rho.mat()) < 1e-14);
}

TEST_CASE("sink-free complete graph revives after one period") {
  const int n = 4;
  const double g = 1.0;
  const auto net = fully_connected(n, g, 0, 1, 0.0);
  const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
  const DensityMatrix rho = DensityMatrix::pure_site(n, 0);
  const double period = 2.0 * std::numbers::pi / (g * n);
  const DensityMatrix out = evolve(rho, h, period);
  CHECK(max_abs_diff(out.mat(), rho.mat()) < 1e-10);
}

TEST_CASE("evolution is a semigroup and preserves Hermiticity") {
  const auto net = fully_connected(5, 0.8, 0, 2, 0.6);
  const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
  const DensityMatrix rho = DensityMatrix::pure_site(5, 0);

  const DensityMatrix both = evolve(rho, h, 0.7 + 1.9);
  const DensityMatrix stepped = evolve(evolve(rho, h, 0.7), h, 1.9);
  CHECK(max_abs_diff(both.mat(), stepped.mat()) < 1e-10);
  CHECK(max_abs_diff(both.mat(), both.mat().adjoint()) < 1e-12);
}

TEST_CASE("trace decays at twice the sink rate when starting on the sink") {
  const double gamma = 2.0;
  const auto net = fully_connected(4, 1.0, 0, 1, gamma);
  const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
  const double dt = 1e-5;
  const DensityMatrix out = evolve(DensityMatrix::pure_site(4, 1), h, dt);
  CHECK(out.trace_real() == doctest::Approx(1.0 - 2.0 * gamma * dt).epsilon(1e-6));
}

TEST_CASE("closed-form complete-graph populations") {
  const int n = 5;
  const double g = 1.0;

  SUBCASE("initial instant") {
    CHECK(analytic_fc_population(n, g, 0.0, 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(analytic_fc_population(n, g, 0.0, 0, 3) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("full revival after one period") {
    const double period = 2.0 * std::numbers::pi / (g * n);
    CHECK(analytic_fc_population(n, g, period, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(analytic_fc_population(n, g, period, 0, 2)) < 1e-12);
  }

  SUBCASE("agrees with direct evolution at a generic time") {
    const auto net = fully_connected(n, g, 0, 1, 0.0);
    const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
    const double t = 0.37;
    const DensityMatrix rho = evolve(DensityMatrix::pure_site(n, 0), h, t);
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(rho.mat()(k, k).real() - analytic_fc_population(n, g, t, 0, k)) < 1e-10);
    }
  }

  SUBCASE("initial node dominates at every time for n > 4") {
    for (double t = 0.0; t <= 3.0; t += 0.01) {
      const double at_start = analytic_fc_population(6, g, t, 0, 0);
      const double elsewhere = analytic_fc_population(6, g, t, 0, 3);
      CHECK(at_start >= elsewhere - 1e-12);
    }
  }
}

TEST_CASE("unprotected fraction of the initial excitation") {
  CHECK(unprotected_population(20) == doctest::Approx(1.0 / 19.0).epsilon(1e-15));
  CHECK(unprotected_population(2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("propagator spectral path matches dense exponentials") {
  const auto net = fully_connected(6, 1.3, 0, 3, 0.9);
  const Eigen::MatrixXcd h = single_excitation_hamiltonian(net);
  const Propagator prop(h);
  CHECK(prop.spectral());
  CHECK(prop.dim() == 6);

  const double dt = 0.41;
  const Eigen::MatrixXcd u = prop.step_operator(dt);
  CHECK(max_abs_diff(u, matrix_exponential(kMinusI * dt * h)) < 1e-11);

  std::mt19937_64 gen(9);
  Eigen::MatrixXcd rho = oracle::random_density(6, gen);
  Eigen::MatrixXcd via_prop = rho;
  prop.advance_site(via_prop, dt);
  const DensityMatrix via_evolve = evolve(DensityMatrix(rho), h, dt);
  CHECK(max_abs_diff(via_prop, via_evolve.mat()) < 1e-11);
}

TEST_CASE("propagator coordinate interface round trips and reproduces site operations") {
  const auto net = fully_connected(5, 1.0, 0, 2, 0.5);
  const Propagator prop(single_excitation_hamiltonian(net));
  std::mt19937_64 gen(21);
  const Eigen::MatrixXcd rho = oracle::random_density(5, gen);

  SUBCASE("round trip") {
    CHECK(max_abs_diff(prop.from_coords(prop.to_coords(rho)), rho) < 1e-12);
  }

  SUBCASE("advancing in coordinates equals advancing in the site basis") {
    Eigen::MatrixXcd coords = prop.to_coords(rho);
    prop.advance_coords(coords, 0.9);
    Eigen::MatrixXcd site = rho;
    prop.advance_site(site, 0.9);
    CHECK(max_abs_diff(prop.from_coords(coords), site) < 1e-11);
  }

  SUBCASE("colliding in coordinates equals the site-basis dephasing channel") {
    const double theta = 1.1;
    Eigen::MatrixXcd coords = prop.to_coords(rho);
    prop.collide_coords(coords, 3, std::cos(theta));
    Eigen::MatrixXcd site = rho;
    scmnet::apply_collision_in_place(site, 3, theta);
    CHECK(max_abs_diff(prop.from_coords(coords), site) < 1e-12);
  }

  SUBCASE("trace in coordinates equals the site-basis trace") {
    const Eigen::MatrixXcd coords = prop.to_coords(rho);
    CHECK(prop.trace_real_coords(coords) == doctest::Approx(rho.trace().real()).epsilon(1e-12));
  }
}

TEST_CASE("propagator falls back to dense stepping for defective generators") {
  // A Jordan block is not diagonalizable; the eigenvector basis is singular.
  Eigen::MatrixXcd jordan = Eigen::MatrixXcd::Zero(3, 3);
  jordan(0, 0) = jordan(1, 1) = jordan(2, 2) = 1.0;
  jordan(0, 1) = jordan(1, 2) = 1.0;
  const Propagator prop(jordan);
  CHECK_FALSE(prop.spectral());

  std::mt19937_64 gen(4);
  Eigen::MatrixXcd rho = oracle::random_density(3, gen);
  const Eigen::MatrixXcd expected =
      matrix_exponential(kMinusI * 0.3 * jordan) * rho *
      matrix_exponential(kMinusI * 0.3 * jordan).adjoint();

  Eigen::MatrixXcd coords = prop.to_coords(rho);
  prop.advance_coords(coords, 0.3);
  CHECK(max_abs_diff(prop.from_coords(coords), expected) < 1e-11);

  Eigen::MatrixXcd site = rho;
  prop.advance_site(site, 0.3);
  CHECK(max_abs_diff(site, expected) < 1e-11);
}
