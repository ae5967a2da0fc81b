#pragma once

// Slow, independent reference implementations used only by the tests.
// Everything here is written for obviousness, not speed, so the production
// code can be checked against it: a long-Taylor matrix exponential, a
// full-register (qubits + ancilla) dephasing collision, and small statistics
// helpers for Monte Carlo checks.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

/// exp(m) via scaling-and-squaring with a fixed 200-term Taylor sum; the
/// scaled argument has norm <= 0.5, so the truncation error is far below
/// double precision.
inline Mat taylor_expm(const Mat& m, int terms = 200) {
  int squarings = 0;
  double scale = 1.0;
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Mat a = m * scale;
  Mat term = Mat::Identity(m.rows(), m.cols());
  Mat sum = term;
  for (int k = 1; k <= terms; ++k) {
    term = (term * a / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = (sum * sum).eval();
  return sum;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Random density matrix G G† / tr(G G†) with standard complex normal G.
/// Uses std::mt19937_64 on purpose: the tested code must not share a
/// random-number implementation with its oracle.
inline Mat random_density(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Cplx(normal(gen), normal(gen));
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

/// Dephasing collision computed the long way: embed the single-excitation
/// state into the full 2^n qubit register, attach an ancilla in |0>, apply
/// the joint unitary exp(-i (theta/2) sigma_x(ancilla) (x) sigma_z(node)),
/// trace out the ancilla, and project back onto the single-excitation basis.
inline Mat full_space_collision(const Mat& rho, int node, double theta) {
  const int n = static_cast<int>(rho.rows());
  const int dim = 1 << n;

  // single-excitation basis vector |i> occupies register index 2^i
  Mat full = Mat::Zero(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) full(1 << i, 1 << j) = rho(i, j);

  Mat z_node = Mat::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) z_node(b, b) = ((b >> node) & 1) ? -1.0 : 1.0;

  Mat sigma_x(2, 2);
  sigma_x << 0, 1, 1, 0;
  Mat anc0 = Mat::Zero(2, 2);
  anc0(0, 0) = 1.0;

  const Mat u = taylor_expm(Cplx(0.0, -theta / 2.0) * kron(sigma_x, z_node));
  const Mat evolved = u * kron(anc0, full) * u.adjoint();

  // partial trace over the ancilla (slow index)
  Mat reg = evolved.block(0, 0, dim, dim) + evolved.block(dim, dim, dim, dim);

  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = reg(1 << i, 1 << j);
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// j-th raw moment of Weibull(k, lambda): lambda^j Gamma(1 + j/k).
inline double weibull_moment(double k, double lambda, int j) {
  return std::pow(lambda, j) * std::tgamma(1.0 + static_cast<double>(j) / k);
}

struct WeibullStats {
  double mean;
  double variance;
  double mean_se;      // standard error of a sample mean of n draws
  double variance_se;  // standard error of a sample variance of n draws
};

/// Exact mean/variance of Weibull(k, lambda) plus the standard errors of
/// their n-draw estimators (the variance SE uses the exact fourth central
/// moment).
inline WeibullStats weibull_stats(double k, double lambda, long n) {
  const double m1 = weibull_moment(k, lambda, 1);
  const double m2 = weibull_moment(k, lambda, 2);
  const double m3 = weibull_moment(k, lambda, 3);
  const double m4 = weibull_moment(k, lambda, 4);
  const double var = m2 - m1 * m1;
  const double mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
  WeibullStats stats;
  stats.mean = m1;
  stats.variance = var;
  stats.mean_se = std::sqrt(var / static_cast<double>(n));
  stats.variance_se = std::sqrt((mu4 - var * var) / static_cast<double>(n));
  return stats;
}

}  // namespace oracle
