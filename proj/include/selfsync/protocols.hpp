#pragma once

#include "selfsync/dde_sim.hpp"
#include "selfsync/delay_matrix.hpp"
#include "selfsync/digraph.hpp"
#include "selfsync/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace selfsync {

// Terms of the delayed consensus value
//   omega* = numerator / (gamma_c + delay_term),
//   numerator = sum gamma_i c_i g_i, gamma_c = sum gamma_i c_i,
//   delay_term = K sum_i sum_{j in N_i} gamma_i a_ij tau_ij.
struct BiasDecomposition {
  double numerator = 0.0;
  double gamma_c = 0.0;
  double delay_term = 0.0;
  double value() const { return numerator / (gamma_c + delay_term); }
};

struct ClusterPrediction {
  std::vector<std::size_t> root_nodes;  // the root SCC that fixes the value
  Eigen::VectorXd omega;                // length 1 for the scalar system
  BiasDecomposition terms;              // scalar system only
  GammaVector gamma;
};

struct ConsensusPrediction {
  bool global = false;
  Eigen::VectorXd omega_star;  // set when global
  std::vector<ClusterPrediction> per_cluster;
  // Nodes outside every root SCC; their limits have no closed form here.
  std::vector<std::size_t> unpredicted;

  double scalar() const { return omega_star(0); }
};

// Global delayed consensus value. Throws TopologyError unless QSC.
ConsensusPrediction predict_consensus(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                      const Eigen::VectorXd& g_values);

// One value per root SCC; works for any connectivity class. `global` is set
// (and omega_star filled) when there is exactly one root.
ConsensusPrediction predict_clusters(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                     const Eigen::VectorXd& g_values);

// Vector system with positive definite Q_i. QSC only.
ConsensusPrediction predict_consensus_vector(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                             const std::vector<Eigen::MatrixXd>& q_mats,
                                             const std::vector<Eigen::VectorXd>& g_vecs);

// Intercepts x0 = (1/K) L^+ D_c dw(omega*) of the synchronized solution
// x*(t) = omega* t + x0, dw_i = g_i - omega* (1 + K/c_i sum_j a_ij tau_ij).
Eigen::VectorXd predict_intercepts(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                   const Eigen::VectorXd& g_values);

// Converged consensus value of one protocol pass, for given forcings and c.
using ConsensusOracle = std::function<double(const Eigen::VectorXd& g_values, const Eigen::VectorXd& c_weights)>;

// Closed-form pass.
ConsensusOracle prediction_oracle(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg);

// Simulated pass: integrates, detects synchronization with `sync` and
// returns the global cluster value. Throws SyncFailure if the run does
// not synchronize.
ConsensusOracle simulation_oracle(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                  SyncDefaults sync = {});

struct UnbiasReport {
  double omega_y = 0.0;
  double omega_one = 0.0;
  double ratio = 0.0;
  Eigen::VectorXd gamma_tilde;   // gamma-estimation protocol only
  Eigen::VectorXd compensated_c; // gamma-estimation protocol only
  std::size_t passes = 0;
};

// Smallest |omega*(1)| accepted as a divisor.
constexpr double kUnbiasFloor = 1e-300;

// Runs the pass with g and the pass with g = 1 under the same c; ratio
// omega*(g) / omega*(1) cancels delays and channel gains.
UnbiasReport two_step_unbias(const ConsensusOracle& oracle, const Eigen::VectorXd& g_values,
                             const Eigen::VectorXd& c_weights);

// N_r + 1 passes with c = 1 (all-ones, then indicator forcings on each node in
// `indicator_nodes`) estimate gamma_tilde_i = gamma_i / sum gamma. c_i is then
// divided by gamma_tilde_i (nodes with gamma_tilde_i = 0 keep c_i) and a
// final two-step run yields the unbiased ratio.
UnbiasReport gamma_estimation_protocol(const ConsensusOracle& oracle, const std::vector<std::size_t>& indicator_nodes,
                                       const Eigen::VectorXd& g_values, const Eigen::VectorXd& c_weights);

// Convenience: prediction mode over the root SCC of a QSC digraph.
UnbiasReport gamma_estimation_protocol(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                       const Eigen::VectorXd& g_values);

}  // namespace selfsync
