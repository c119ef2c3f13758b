#include "selfsync/protocols.hpp"

#include "selfsync/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace selfsync {

namespace {

void check_inputs(const SensorDigraph& g, const DelayMatrix& delays, std::size_t values) {
  if (delays.size() != g.size()) throw ValidationError("delay matrix size does not match the digraph");
  if (values != g.size()) throw ValidationError("expected one forcing value per node");
}

// K sum_{i in support} sum_{j in N_i} gamma_i a_ij tau_ij
double delay_term(const SensorDigraph& g, const DelayMatrix& delays, double k_gain, const GammaVector& gamma) {
  double acc = 0.0;
  for (auto i : gamma.support) {
    double row = 0.0;
    for (auto j : g.neighbors(i)) row += g.weight(i, j) * delays(i, j);
    acc += gamma.gamma(static_cast<Eigen::Index>(i)) * row;
  }
  return k_gain * acc;
}

ClusterPrediction scalar_cluster(const SensorDigraph& g, const DelayMatrix& delays, double k_gain,
                                 const Eigen::VectorXd& c, const Eigen::VectorXd& g_values, GammaVector gamma) {
  ClusterPrediction out;
  out.root_nodes = gamma.support;
  for (auto i : gamma.support) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.terms.numerator += gamma.gamma(ii) * c(ii) * g_values(ii);
    out.terms.gamma_c += gamma.gamma(ii) * c(ii);
  }
  out.terms.delay_term = delay_term(g, delays, k_gain, gamma);
  if (!(out.terms.gamma_c + out.terms.delay_term > 0.0)) {
    throw NumericalError("consensus denominator is not positive");
  }
  // A lone root node has no in-neighbors, so its forcing is the value exactly.
  const double value = gamma.support.size() == 1 ? g_values(static_cast<Eigen::Index>(gamma.support.front()))
                                                 : out.terms.value();
  out.omega = Eigen::VectorXd::Constant(1, value);
  out.gamma = std::move(gamma);
  return out;
}

std::vector<std::size_t> nodes_outside(std::size_t n, const std::vector<ClusterPrediction>& clusters) {
  std::vector<bool> covered(n, false);
  for (const auto& c : clusters)
    for (auto v : c.root_nodes) covered[v] = true;
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < n; ++v)
    if (!covered[v]) out.push_back(v);
  return out;
}

}  // namespace

ConsensusPrediction predict_clusters(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                     const Eigen::VectorXd& g_values) {
  check_inputs(g, delays, static_cast<std::size_t>(g_values.size()));
  const auto c = cfg.weights_for(g.size());
  const auto L = laplacian(g);
  const auto scc = scc_decompose(g);
  ConsensusPrediction out;
  for (auto& gamma : gamma_per_root(L, scc)) {
    out.per_cluster.push_back(scalar_cluster(g, delays, cfg.k_gain, c, g_values, std::move(gamma)));
  }
  out.unpredicted = nodes_outside(g.size(), out.per_cluster);
  out.global = out.per_cluster.size() == 1;
  if (out.global) out.omega_star = out.per_cluster.front().omega;
  return out;
}

ConsensusPrediction predict_consensus(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                      const Eigen::VectorXd& g_values) {
  check_inputs(g, delays, static_cast<std::size_t>(g_values.size()));
  if (!scc_decompose(g).is_qsc()) throw TopologyError("global consensus not guaranteed: digraph is not QSC");
  return predict_clusters(g, delays, cfg, g_values);
}

ConsensusPrediction predict_consensus_vector(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                             const std::vector<Eigen::MatrixXd>& q_mats,
                                             const std::vector<Eigen::VectorXd>& g_vecs) {
  check_inputs(g, delays, g_vecs.size());
  if (q_mats.size() != g.size()) throw ValidationError("need one Q matrix per node");
  const auto scc = scc_decompose(g);
  if (!scc.is_qsc()) throw TopologyError("global consensus not guaranteed: digraph is not QSC");
  const auto dim = q_mats.front().rows();
  auto gamma = gamma_left_eigenvector(laplacian(g), scc);

  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (auto i : gamma.support) {
    const auto& q = q_mats[i];
    if (q.rows() != dim || q.cols() != dim || g_vecs[i].size() != dim) {
      throw ValidationError("dimension mismatch at node " + std::to_string(i));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success) throw ValidationError("Q matrix of node " + std::to_string(i) + " is not positive definite");
    const double w = gamma.gamma(static_cast<Eigen::Index>(i));
    lhs += w * q;
    rhs += w * (q * g_vecs[i]);
  }
  const double dt = delay_term(g, delays, cfg.k_gain, gamma);
  lhs.diagonal().array() += dt;

  Eigen::LLT<Eigen::MatrixXd> solver(lhs);
  if (solver.info() != Eigen::Success) throw NumericalError("combined consensus matrix is singular");

  ClusterPrediction cl;
  cl.root_nodes = gamma.support;
  cl.omega = solver.solve(rhs);
  cl.gamma = std::move(gamma);
  ConsensusPrediction out;
  out.global = true;
  out.omega_star = cl.omega;
  out.per_cluster.push_back(std::move(cl));
  out.unpredicted = nodes_outside(g.size(), out.per_cluster);
  return out;
}

Eigen::VectorXd predict_intercepts(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                   const Eigen::VectorXd& g_values) {
  const double omega = predict_consensus(g, delays, cfg, g_values).scalar();
  const auto c = cfg.weights_for(g.size());
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double link = 0.0;
    for (auto j : g.neighbors(static_cast<std::size_t>(i))) link += g.weights()(i, static_cast<Eigen::Index>(j)) * delays.tau()(i, static_cast<Eigen::Index>(j));
    const double dw = g_values(i) - omega * (1.0 + cfg.k_gain / c(i) * link);
    rhs(i) = c(i) * dw / cfg.k_gain;
  }
  // Minimum-norm solution of L x0 = rhs, i.e. the Moore-Penrose inverse applied to rhs.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(laplacian(g).matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return svd.solve(rhs);
}

ConsensusOracle prediction_oracle(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg) {
  return [g, delays, cfg](const Eigen::VectorXd& g_values, const Eigen::VectorXd& c_weights) {
    SimConfig pass = cfg;
    pass.c_weights = c_weights;
    return predict_consensus(g, delays, pass, g_values).scalar();
  };
}

ConsensusOracle simulation_oracle(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                  SyncDefaults sync) {
  return [g, delays, cfg, sync](const Eigen::VectorXd& g_values, const Eigen::VectorXd& c_weights) {
    SimConfig pass = cfg;
    pass.c_weights = c_weights;
    const auto traj = simulate(g, delays, pass, g_values);
    const auto result = detect_sync(traj, sync);
    if (!result.global) throw SyncFailure("protocol pass did not synchronize within the horizon");
    return result.clusters.front().value(0);
  };
}

UnbiasReport two_step_unbias(const ConsensusOracle& oracle, const Eigen::VectorXd& g_values,
                             const Eigen::VectorXd& c_weights) {
  UnbiasReport r;
  r.omega_y = oracle(g_values, c_weights);
  r.omega_one = oracle(Eigen::VectorXd::Ones(g_values.size()), c_weights);
  r.passes = 2;
  if (!(std::abs(r.omega_one) > kUnbiasFloor)) throw NumericalError("unit-forcing consensus vanished; ratio undefined");
  r.ratio = r.omega_y / r.omega_one;
  return r;
}

UnbiasReport gamma_estimation_protocol(const ConsensusOracle& oracle, const std::vector<std::size_t>& indicator_nodes,
                                       const Eigen::VectorXd& g_values, const Eigen::VectorXd& c_weights) {
  const auto n = g_values.size();
  const Eigen::VectorXd c = c_weights.size() == 0 ? Eigen::VectorXd::Ones(n) : c_weights;
  if (c.size() != n) throw ValidationError("c weights size mismatch");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  const double base = oracle(ones, ones);
  if (!(std::abs(base) > kUnbiasFloor)) throw NumericalError("unit-forcing consensus vanished; gamma undefined");
  Eigen::VectorXd gamma_tilde = Eigen::VectorXd::Zero(n);
  for (auto i : indicator_nodes) {
    if (static_cast<Eigen::Index>(i) >= n) throw ValidationError("indicator node out of range");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(static_cast<Eigen::Index>(i)) = 1.0;
    gamma_tilde(static_cast<Eigen::Index>(i)) = oracle(e, ones) / base;
  }

  Eigen::VectorXd compensated = c;
  for (Eigen::Index i = 0; i < n; ++i)
    if (gamma_tilde(i) > 0.0) compensated(i) = c(i) / gamma_tilde(i);

  auto report = two_step_unbias(oracle, g_values, compensated);
  report.passes += 1 + indicator_nodes.size();
  report.gamma_tilde = std::move(gamma_tilde);
  report.compensated_c = std::move(compensated);
  return report;
}

UnbiasReport gamma_estimation_protocol(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                                       const Eigen::VectorXd& g_values) {
  const auto scc = scc_decompose(g);
  if (!scc.is_qsc()) throw TopologyError("gamma estimation needs a QSC digraph");
  return gamma_estimation_protocol(prediction_oracle(g, delays, cfg), scc.root_nodes(), g_values,
                                   cfg.weights_for(g.size()));
}

}  // namespace selfsync
