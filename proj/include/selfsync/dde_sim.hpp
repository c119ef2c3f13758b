#pragma once

#include "selfsync/delay_matrix.hpp"
#include "selfsync/digraph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace selfsync {

// Initial functions phi_i on [-tau, 0], one per node (and per coordinate in
// the vector case, stored node-major).
class InitialHistory {
 public:
  enum class Kind { Constant, Linear, Table };

  // phi_i(t) = 0.
  InitialHistory() = default;
  static InitialHistory constant(Eigen::VectorXd values);
  // phi_i(t) = offset_i + slope_i * t.
  static InitialHistory linear(Eigen::VectorXd offsets, Eigen::VectorXd slopes);
  // rows[i][k] = phi_i(-k * t_step); the last entry is held for older lags.
  static InitialHistory table(std::vector<std::vector<double>> rows);

  Kind kind() const noexcept { return kind_; }
  // Value of component `index` at time t <= 0. `t_step` resolves table lookups.
  double value(std::size_t index, double t, double t_step) const;
  // Number of components described; 0 means "all zero".
  std::size_t size() const noexcept;

 private:
  Kind kind_ = Kind::Constant;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  std::vector<std::vector<double>> table_;
};

struct SimConfig {
  double t_step = 1e-3;
  double k_gain = 1.0;
  Eigen::VectorXd c_weights;  // empty means c_i = 1
  std::size_t horizon = 1000; // number of Euler steps
  InitialHistory init;
  double noise_std = 0.0;
  std::uint64_t rng_seed = 0;
  std::size_t record_every = 1;

  // Resolved weights for an n-node network; validates K, c_i and t_step.
  Eigen::VectorXd weights_for(std::size_t n) const;
};

struct SyncCluster {
  std::vector<std::size_t> nodes;
  Eigen::VectorXd value;  // measured consensus derivative (length = dim)
  double spread = 0.0;    // largest pairwise derivative gap over the window
  double detection_time = 0.0;
};

struct SyncResult {
  std::vector<SyncCluster> clusters;
  std::vector<std::size_t> unclustered;
  bool global = false;
  double tol = 0.0;
  std::size_t window = 0;
};

// Sampled solution. Row k of `states`/`derivatives` is step k*record_every;
// columns are node-major (node i occupies [i*dim, (i+1)*dim)).
struct Trajectory {
  std::size_t nodes = 0;
  std::size_t dim = 1;
  double t_step = 0.0;
  Eigen::VectorXd times;
  Eigen::MatrixXd states;
  Eigen::MatrixXd derivatives;
  std::optional<SyncResult> sync;

  std::size_t samples() const noexcept { return static_cast<std::size_t>(times.size()); }
  // Derivative of node i (coordinate c) at sample k.
  double derivative(std::size_t k, std::size_t i, std::size_t c = 0) const {
    return derivatives(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i * dim + c));
  }
  double state(std::size_t k, std::size_t i, std::size_t c = 0) const {
    return states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i * dim + c));
  }
};

// Link lag in steps, round(tau / t_step).
std::size_t delay_steps(double tau, double t_step);

// Forward-Euler integration of the scalar delayed coupled system. Applies
// coupling noise when cfg.noise_std > 0.
Trajectory simulate(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                    const Eigen::VectorXd& g_values);

// Same recursion with cfg.noise_std overridden.
Trajectory simulate_noisy(const SensorDigraph& g, const DelayMatrix& delays, SimConfig cfg,
                          const Eigen::VectorXd& g_values, double noise_std);

// Vector system: x_i' = g_i + K Q_i^{-1} sum_j a_ij (x_j(t - tau_ij) - x_i(t)).
// cfg.c_weights is ignored; Q_i must be symmetric positive definite.
Trajectory simulate_vector(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                           const std::vector<Eigen::MatrixXd>& q_mats,
                           const std::vector<Eigen::VectorXd>& g_vecs);

// Groups nodes whose derivatives over the last `window` samples are
// stationary and pairwise within `tol`. Singletons are reported as
// unclustered unless the network has one node.
SyncResult detect_sync(const Trajectory& traj, double tol, std::size_t window);

// tol = rel * max |window mean derivative| (floored at `abs_floor`),
// window = fraction of the recorded samples.
struct SyncDefaults {
  double rel_tol = 1e-4;
  double abs_floor = 1e-12;
  double window_fraction = 0.1;
};
SyncResult detect_sync(const Trajectory& traj, const SyncDefaults& defaults = {});

}  // namespace selfsync
