#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "scmnet/rng.hpp"

namespace scmnet {

struct InvalidNetworkError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Excitation-hopping network restricted to the single-excitation subspace.
///
/// Node indices are 0-based throughout the library; user-facing I/O (CLI,
/// JSON files) is 1-based and converted at the boundary. Units: hbar = 1,
/// energies and couplings are angular frequencies in arbitrary inverse-time
/// units.
class ExcitationNetwork {
 public:
  ExcitationNetwork(Eigen::VectorXd site_energies, Eigen::MatrixXd couplings,
                    int initial_node, int sink_node, double sink_rate);

  int n_sites() const { return static_cast<int>(site_energies_.size()); }
  const Eigen::VectorXd& site_energies() const { return site_energies_; }
  const Eigen::MatrixXd& couplings() const { return couplings_; }
  int initial_node() const { return initial_node_; }
  int sink_node() const { return sink_node_; }
  double sink_rate() const { return sink_rate_; }

  ExcitationNetwork with_sink_rate(double gamma) const;

 private:
  Eigen::VectorXd site_energies_;
  Eigen::MatrixXd couplings_;  // symmetric, zero diagonal
  int initial_node_;           // 0-based
  int sink_node_;              // 0-based
  double sink_rate_;
};

/// All-to-all graph with uniform hopping g and zero site energies.
/// r and s are 0-based node indices.
ExcitationNetwork fully_connected(int n, double g, int r, int s, double gamma);

/// 8-site Fenna-Matthews-Olson network; energies shifted so the sink site
/// (site 3 in 1-based labeling) has zero energy. Excitation enters at site 1.
ExcitationNetwork fmo_network(double gamma);

/// 7-site variant with the eighth site removed.
ExcitationNetwork fmo7_network(double gamma);

/// Effective Hamiltonian on the single-excitation subspace:
/// H_ij = g_ij for i != j, H_ii = omega_i, and -i*gamma added on the sink
/// diagonal. Non-Hermitian iff gamma > 0.
Eigen::MatrixXcd single_excitation_hamiltonian(const ExcitationNetwork& net);

/// Uniformly permutes the strictly-upper-triangular coupling values (symmetry
/// restored afterwards); energies, endpoints and sink rate are unchanged. The
/// multiset of coupling values is preserved bitwise.
ExcitationNetwork reshuffle_couplings(const ExcitationNetwork& net, SplitRng& rng);

}  // namespace scmnet
