#pragma once

#include "selfsync/dde_sim.hpp"
#include "selfsync/delay_matrix.hpp"
#include "selfsync/digraph.hpp"
#include "selfsync/io.hpp"
#include "selfsync/netgen.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace selfsync::cli {

// Scenario config document:
//   seed, n, D, T_s, K, eta, powers (number or array), threshold,
//   delay_mode   "zero" | "uniform" | "max_delay" | "propagation"
//   tau_max      (uniform, max_delay), speed and offset (propagation)
//   channel_mode "rayleigh" | "pathloss" | "reference"
//   topology     "sc" | "qsc3" | "wc2" (reference channel mode)
//   rayleigh_convention "second_moment" | "gaussian_variance"
//   c_weights, g_values (array, or {"uniform": [lo, hi]}), horizon,
//   sync_rel_tol, window_fraction
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::size_t n = 0;
  double side = 1.0;
  double t_step = 1e-3;
  double k_gain = 1.0;
  double eta = 2.0;
  Eigen::VectorXd powers;  // empty = unit powers
  double threshold = 0.0;
  std::string delay_mode = "zero";
  double tau_max = 0.0;
  double speed = 1.0;
  double offset = 0.0;
  std::string channel_mode = "rayleigh";
  std::string topology;
  RayleighConvention convention = RayleighConvention::SecondMoment;
  Eigen::VectorXd c_weights;
  Eigen::VectorXd g_values;  // empty = drawn from g_range
  double g_low = 1.0, g_high = 2.0;
  std::size_t horizon = 5000;
  double sync_rel_tol = 1e-4;
  double window_fraction = 0.1;
};

// Parses a config document; semantic errors carry the line of the
// offending key.
ScenarioConfig parse_scenario_config(const std::string& text);

struct Scenario {
  std::uint64_t seed = 1;
  std::string label;
  SensorDigraph graph;
  DelayMatrix delays;
  std::optional<NodeGeometry> geometry;
  SimConfig sim;
  Eigen::VectorXd g_values;
  SyncDefaults sync;
};

Scenario generate_scenario(const ScenarioConfig& cfg);

// Writes scenario.json, digraph.json, delays.json (and geometry.json) into
// `dir`, creating it if needed.
void write_scenario(const Scenario& s, const std::string& dir);
Scenario read_scenario(const std::string& dir);

io::Json scenario_to_json(const Scenario& s);

// FNV-1a over the canonical scenario documents, hex encoded.
std::string scenario_digest(const Scenario& s);

}  // namespace selfsync::cli
