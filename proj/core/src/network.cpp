#include "scmnet/network.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace scmnet {

ExcitationNetwork::ExcitationNetwork(Eigen::VectorXd site_energies,
                                     Eigen::MatrixXd couplings, int initial_node,
                                     int sink_node, double sink_rate)
    : site_energies_(std::move(site_energies)),
      couplings_(std::move(couplings)),
      initial_node_(initial_node),
      sink_node_(sink_node),
      sink_rate_(sink_rate) {
  const int n = static_cast<int>(site_energies_.size());
  if (n < 2) throw InvalidNetworkError("network needs at least 2 sites");
  if (couplings_.rows() != n || couplings_.cols() != n)
    throw InvalidNetworkError("couplings must be n_sites x n_sites");
  if (!site_energies_.allFinite() || !couplings_.allFinite())
    throw InvalidNetworkError("network entries must be finite");
  if (couplings_ != couplings_.transpose())
    throw InvalidNetworkError("couplings must be exactly symmetric");
  if (couplings_.diagonal().cwiseAbs().maxCoeff() != 0.0)
    throw InvalidNetworkError("couplings must have zero diagonal");
  if (initial_node_ < 0 || initial_node_ >= n || sink_node_ < 0 || sink_node_ >= n)
    throw InvalidNetworkError("initial/sink node out of range");
  if (initial_node_ == sink_node_)
    throw InvalidNetworkError("initial node must differ from sink node");
  if (!(sink_rate_ >= 0.0) || !std::isfinite(sink_rate_))
    throw InvalidNetworkError("sink rate must be finite and non-negative");
}

ExcitationNetwork ExcitationNetwork::with_sink_rate(double gamma) const {
  return ExcitationNetwork(site_energies_, couplings_, initial_node_, sink_node_, gamma);
}

ExcitationNetwork fully_connected(int n, double g, int r, int s, double gamma) {
  if (n < 2) throw InvalidNetworkError("fully_connected: n must be >= 2");
  Eigen::MatrixXd couplings = Eigen::MatrixXd::Constant(n, n, g);
  couplings.diagonal().setZero();
  return ExcitationNetwork(Eigen::VectorXd::Zero(n), couplings, r, s, gamma);
}

namespace {

// Site energies on the diagonal, hoppings off it; energies shifted so the
// sink site has zero energy.
constexpr double kFmo[8][8] = {
    {200.0, -94.8, 5.5, -5.9, 7.1, -15.1, -12.2, 39.5},
    {-94.8, 230.0, 29.8, 7.6, 1.6, 13.1, 5.7, 7.9},
    {5.5, 29.8, 0.0, -58.9, -1.2, -9.3, 3.4, 1.4},
    {-5.9, 7.6, -58.9, 180.0, -64.1, -17.4, -62.3, -1.6},
    {7.1, 1.6, -1.2, -64.1, 405.0, 89.5, -4.6, 4.4},
    {-15.1, 13.1, -9.3, -17.4, 89.5, 320.0, 35.1, -9.1},
    {-12.2, 5.7, 3.4, -62.3, -4.6, 35.1, 270.0, 11.1},
    {39.5, 7.9, 1.4, -1.6, 4.4, -9.1, 11.1, 505.0},
};

ExcitationNetwork fmo_sites(int n, double gamma) {
  Eigen::VectorXd energies(n);
  Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    energies(i) = kFmo[i][i];
    for (int j = 0; j < n; ++j)
      if (i != j) couplings(i, j) = kFmo[i][j];
  }
  // excitation enters at site 1, sink attached to site 3 (1-based labels)
  return ExcitationNetwork(energies, couplings, 0, 2, gamma);
}

}  // namespace

ExcitationNetwork fmo_network(double gamma) { return fmo_sites(8, gamma); }

ExcitationNetwork fmo7_network(double gamma) { return fmo_sites(7, gamma); }

Eigen::MatrixXcd single_excitation_hamiltonian(const ExcitationNetwork& net) {
  const int n = net.n_sites();
  Eigen::MatrixXcd h = net.couplings().cast<std::complex<double>>();
  h.diagonal() = net.site_energies().cast<std::complex<double>>();
  h(net.sink_node(), net.sink_node()) -= std::complex<double>(0.0, net.sink_rate());
  return h;
}

ExcitationNetwork reshuffle_couplings(const ExcitationNetwork& net, SplitRng& rng) {
  const int n = net.n_sites();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) values.push_back(net.couplings()(i, j));

  // Fisher-Yates
  for (std::size_t i = values.size(); i > 1; --i)
    std::swap(values[i - 1], values[rng.below(i)]);

  Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(n, n);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      couplings(i, j) = values[idx];
      couplings(j, i) = values[idx];
      ++idx;
    }
  return ExcitationNetwork(net.site_energies(), couplings, net.initial_node(),
                           net.sink_node(), net.sink_rate());
}

}  // namespace scmnet
