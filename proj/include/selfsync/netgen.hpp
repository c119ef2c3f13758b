#pragma once

#include "selfsync/delay_matrix.hpp"
#include "selfsync/digraph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>

namespace selfsync {

// Counter-based generator: output k of stream `key` is splitmix64(key + k*phi).
// Satisfies UniformRandomBitGenerator, so standard distributions accept it.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  // Independent substream for (seed, a, b); used per node and per link so
  // draws never depend on iteration order.
  static CounterRng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;
  // Uniform on the open interval (0, 1).
  double uniform() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct NodeGeometry {
  Eigen::MatrixXd positions;  // n x 2
  Eigen::MatrixXd distances;  // n x n, symmetric, zero diagonal
  Eigen::VectorXd powers;     // P_j > 0
  double side = 1.0;          // D
  double path_loss_exponent = 2.0;
  double speed = 1.0;         // propagation speed c
  Eigen::MatrixXd offsets;    // T_ij >= 0

  std::size_t size() const noexcept { return static_cast<std::size_t>(positions.rows()); }
};

// Uniform placement on [0, side]^2; unit powers, zero offsets.
NodeGeometry place_nodes(std::size_t n, double side, std::uint64_t seed);

// Which quantity sigma_ij^2 = P_j / (1 + d_ij^2) denotes for a Rayleigh amplitude.
enum class RayleighConvention {
  SecondMoment,      // E[a^2] = sigma_ij^2
  GaussianVariance,  // per-component variance of the underlying complex Gaussian
};

SensorDigraph channel_rayleigh(const NodeGeometry& geom, std::uint64_t seed,
                               RayleighConvention convention = RayleighConvention::SecondMoment);

// a_ij = sqrt(P_j |h_ij|^2 / d_ij^eta); `fading` holds |h_ij|.
SensorDigraph channel_pathloss(const NodeGeometry& geom, const Eigen::MatrixXd& fading);

// Zeroes every weight below `min_amplitude`.
SensorDigraph threshold_prune(const SensorDigraph& g, double min_amplitude);

// tau_ij = T_ij + d_ij / c.
DelayMatrix delays_from_geometry(const NodeGeometry& geom);

// Propagation speed that makes the largest d_ij / c equal `tau_max`
// (offsets ignored). Returns +inf for a single node.
double speed_for_max_delay(const NodeGeometry& geom, double tau_max);

// Fixed 14-node topologies used in the consensus-form demonstrations.
enum class ReferenceTopology {
  StronglyConnected,  // one SCC, unbalanced
  ThreeScc,           // QSC; root SCC plus two downstream SCCs
  TwoRootForest,      // WC; two root SCCs feeding downstream nodes that mix both
};

SensorDigraph reference_topology(ReferenceTopology kind);
ReferenceTopology parse_reference_topology(const std::string& name);

}  // namespace selfsync
