#pragma once

#include "selfsync/io.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace selfsync::cli {

// Distributed estimation of a scalar xi from y_i = A_i xi + w_i over random
// Rayleigh-faded networks. Each trial draws a fresh placement, channel set
// and observation noise from its own seed.
struct MonteCarloConfig {
  std::uint64_t seed = 1;
  std::size_t n = 40;
  std::size_t trials = 100;
  double xi = 1.0;
  double snr_db = 20.0;  // |xi|^2 / sigma_w^2
  double amp_low = 0.5, amp_high = 1.5;
  double side = 1.0;
  double t_step = 1e-3;
  double k_gain = 30.0;
  std::size_t tau_steps = 100;  // largest propagation delay, in steps
  std::size_t horizon = 4000;
  std::size_t record_every = 10;
  double coupling_noise_std = 0.2;  // sigma_v of the noisy variants, relative to |xi|
  bool noisy = true;
  double final_fraction = 0.25;  // tail of the record averaged into the final estimate
  std::size_t threads = 0;       // 0 = hardware concurrency
};

MonteCarloConfig parse_montecarlo_config(const std::string& text);

// Per-iteration statistics of one estimator. Each trial contributes its
// node-averaged estimate; mean and sample std are taken across trials.
struct CaseCurve {
  std::string name;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXd final_per_trial;  // tail-averaged, node-averaged estimate
  double final_mean = 0.0;
  double final_variance = 0.0;  // across trials
  double standard_error = 0.0;
};

struct MonteCarloResult {
  MonteCarloConfig config;
  Eigen::VectorXd iterations;
  Eigen::VectorXd times;
  std::vector<CaseCurve> cases;  // "ml" first
  double runtime_seconds = 0.0;

  const CaseCurve& find(const std::string& name) const;
  // final_mean(name) - final_mean("ml").
  double bias_vs_ml(const std::string& name) const;
};

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg);

// Columns: iteration, t, then <case>_mean, <case>_std per case.
void write_curves_csv(std::ostream& os, const MonteCarloResult& r);
io::Json montecarlo_summary(const MonteCarloResult& r);

}  // namespace selfsync::cli
