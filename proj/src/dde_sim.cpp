#include "selfsync/dde_sim.hpp"

#include "selfsync/delay_line.hpp"
#include "selfsync/error.hpp"
#include "selfsync/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace selfsync {

InitialHistory InitialHistory::constant(Eigen::VectorXd values) {
  InitialHistory h;
  h.kind_ = Kind::Constant;
  h.a_ = std::move(values);
  return h;
}

InitialHistory InitialHistory::linear(Eigen::VectorXd offsets, Eigen::VectorXd slopes) {
  if (offsets.size() != slopes.size()) throw ValidationError("linear history: offsets/slopes size mismatch");
  InitialHistory h;
  h.kind_ = Kind::Linear;
  h.a_ = std::move(offsets);
  h.b_ = std::move(slopes);
  return h;
}

InitialHistory InitialHistory::table(std::vector<std::vector<double>> rows) {
  for (const auto& r : rows)
    if (r.empty()) throw ValidationError("history table rows must be nonempty");
  InitialHistory h;
  h.kind_ = Kind::Table;
  h.table_ = std::move(rows);
  return h;
}

std::size_t InitialHistory::size() const noexcept {
  return kind_ == Kind::Table ? table_.size() : static_cast<std::size_t>(a_.size());
}

double InitialHistory::value(std::size_t index, double t, double t_step) const {
  switch (kind_) {
    case Kind::Constant:
      return a_.size() == 0 ? 0.0 : a_(static_cast<Eigen::Index>(index));
    case Kind::Linear:
      return a_(static_cast<Eigen::Index>(index)) + b_(static_cast<Eigen::Index>(index)) * t;
    case Kind::Table: {
      const auto& row = table_.at(index);
      const auto k = static_cast<std::size_t>(std::llround(-t / t_step));
      return row[std::min(k, row.size() - 1)];
    }
  }
  return 0.0;
}

Eigen::VectorXd SimConfig::weights_for(std::size_t n) const {
  if (!(t_step > 0.0) || !std::isfinite(t_step)) throw ValidationError("t_step must be positive");
  if (!(k_gain > 0.0) || !std::isfinite(k_gain)) throw ValidationError("coupling gain K must be positive");
  if (record_every == 0) throw ValidationError("record_every must be at least 1");
  if (!(noise_std >= 0.0)) throw ValidationError("noise_std must be nonnegative");
  if (c_weights.size() == 0) return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  if (static_cast<std::size_t>(c_weights.size()) != n) {
    throw ValidationError("expected " + std::to_string(n) + " c weights, got " + std::to_string(c_weights.size()));
  }
  for (Eigen::Index i = 0; i < c_weights.size(); ++i) {
    if (!(c_weights(i) > 0.0) || !std::isfinite(c_weights(i)))
      throw ValidationError("c weight of node " + std::to_string(i) + " must be positive");
  }
  return c_weights;
}

std::size_t delay_steps(double tau, double t_step) {
  return static_cast<std::size_t>(std::llround(tau / t_step));
}

namespace {

double standard_normal(CounterRng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Shared Euler core. gains[i] = K * Q_i^{-1} (dim x dim).
Trajectory integrate(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                     const std::vector<Eigen::MatrixXd>& gains, const std::vector<Eigen::VectorXd>& forcing,
                     std::size_t dim) {
  const std::size_t n = g.size();
  if (delays.size() != n) throw ValidationError("delay matrix size does not match the digraph");
  const double h = cfg.t_step;
  const auto deg = degrees(g).in;

  for (std::size_t i = 0; i < n; ++i) {
    const double stiffness = h * deg(static_cast<Eigen::Index>(i)) *
                             gains[i].cwiseAbs().rowwise().sum().maxCoeff();
    if (stiffness >= 2.0) {
      throw ValidationError("explicit Euler unstable at node " + std::to_string(i) + ": t_step*K/c_i*deg_in = " +
                            std::to_string(stiffness) + " >= 2; reduce t_step or K");
    }
  }
  if (cfg.init.size() != 0 && cfg.init.size() != n * dim) {
    throw ValidationError("initial history describes " + std::to_string(cfg.init.size()) + " components, expected " +
                          std::to_string(n * dim));
  }

  // Per-link lags and per-transmitter history depth.
  std::vector<std::vector<std::size_t>> lag(n);
  std::vector<std::size_t> depth(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : g.neighbors(i)) {
      const auto m = delay_steps(delays(i, j), h);
      lag[i].push_back(m);
      depth[j] = std::max(depth[j], m);
    }
  }

  std::vector<DelayLine<double>> history(n);
  std::vector<double> sample(dim);
  for (std::size_t j = 0; j < n; ++j) {
    history[j] = DelayLine<double>(depth[j] + 1, dim);
    for (std::size_t k = depth[j] + 1; k-- > 0;) {
      for (std::size_t c = 0; c < dim; ++c)
        sample[c] = cfg.init.value(j * dim + c, -static_cast<double>(k) * h, h);
      history[j].push(sample);
    }
  }

  const std::size_t rows = (cfg.horizon + cfg.record_every - 1) / cfg.record_every;
  Trajectory traj;
  traj.nodes = n;
  traj.dim = dim;
  traj.t_step = h;
  traj.times.resize(static_cast<Eigen::Index>(rows));
  traj.states.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n * dim));
  traj.derivatives.resizeLike(traj.states);

  std::vector<CounterRng> noise;
  if (cfg.noise_std > 0.0) {
    for (std::size_t i = 0; i < n; ++i) noise.push_back(CounterRng::substream(cfg.rng_seed, 0x6e6f697365, i));
  }

  Eigen::MatrixXd next(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  Eigen::VectorXd coupling(static_cast<Eigen::Index>(dim));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(dim));
  for (std::size_t step = 0; step < cfg.horizon; ++step) {
    const bool record = step % cfg.record_every == 0;
    const auto row = static_cast<Eigen::Index>(step / cfg.record_every);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = history[i].at_lag(0);
      coupling.setZero();
      const auto& nb = g.neighbors(i);
      for (std::size_t e = 0; e < nb.size(); ++e) {
        const double a = g.weight(i, nb[e]);
        const auto xj = history[nb[e]].at_lag(lag[i][e]);
        for (std::size_t c = 0; c < dim; ++c) coupling(static_cast<Eigen::Index>(c)) += a * (xj[c] - xi[c]);
      }
      rhs.noalias() = forcing[i] + gains[i] * coupling;
      if (!noise.empty()) {
        for (std::size_t c = 0; c < dim; ++c) rhs(static_cast<Eigen::Index>(c)) += cfg.noise_std * standard_normal(noise[i]);
      }
      for (std::size_t c = 0; c < dim; ++c) {
        const auto col = static_cast<Eigen::Index>(i * dim + c);
        const double r = rhs(static_cast<Eigen::Index>(c));
        const double x_next = xi[c] + h * r;
        if (!std::isfinite(r) || !std::isfinite(x_next)) {
          throw NumericalError("non-finite state at step " + std::to_string(step) + ", node " + std::to_string(i));
        }
        if (record) {
          traj.states(row, col) = xi[c];
          traj.derivatives(row, col) = r;
        }
        next(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = x_next;
      }
    }
    if (record) traj.times(row) = static_cast<double>(step) * h;
    for (std::size_t i = 0; i < n; ++i)
      history[i].push({next.col(static_cast<Eigen::Index>(i)).data(), dim});
  }
  return traj;
}

}  // namespace

Trajectory simulate(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                    const Eigen::VectorXd& g_values) {
  const std::size_t n = g.size();
  if (static_cast<std::size_t>(g_values.size()) != n) throw ValidationError("g_values size does not match the digraph");
  const auto c = cfg.weights_for(n);
  std::vector<Eigen::MatrixXd> q(n);
  std::vector<Eigen::VectorXd> gv(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = Eigen::MatrixXd::Constant(1, 1, c(static_cast<Eigen::Index>(i)));
    gv[i] = Eigen::VectorXd::Constant(1, g_values(static_cast<Eigen::Index>(i)));
  }
  return simulate_vector(g, delays, cfg, q, gv);
}

Trajectory simulate_noisy(const SensorDigraph& g, const DelayMatrix& delays, SimConfig cfg,
                          const Eigen::VectorXd& g_values, double noise_std) {
  cfg.noise_std = noise_std;
  return simulate(g, delays, cfg, g_values);
}

Trajectory simulate_vector(const SensorDigraph& g, const DelayMatrix& delays, const SimConfig& cfg,
                           const std::vector<Eigen::MatrixXd>& q_mats, const std::vector<Eigen::VectorXd>& g_vecs) {
  const std::size_t n = g.size();
  SimConfig checked = cfg;
  checked.c_weights.resize(0);
  checked.weights_for(n);
  if (q_mats.size() != n || g_vecs.size() != n) throw ValidationError("need one Q matrix and one g vector per node");
  const auto dim = static_cast<std::size_t>(q_mats.front().rows());
  if (dim == 0) throw ValidationError("vector dimension must be at least 1");
  std::vector<Eigen::MatrixXd> gains(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = q_mats[i];
    if (static_cast<std::size_t>(q.rows()) != dim || static_cast<std::size_t>(q.cols()) != dim ||
        static_cast<std::size_t>(g_vecs[i].size()) != dim) {
      throw ValidationError("dimension mismatch at node " + std::to_string(i));
    }
    if (!q.isApprox(q.transpose(), 1e-12)) throw ValidationError("Q matrix of node " + std::to_string(i) + " is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("Q matrix of node " + std::to_string(i) + " is not positive definite");
    }
    gains[i] = cfg.k_gain * llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
  }
  return integrate(g, delays, cfg, gains, g_vecs, dim);
}

namespace {

double max_gap(const Trajectory& t, std::size_t first, std::size_t a, std::size_t b) {
  double gap = 0.0;
  for (std::size_t k = first; k < t.samples(); ++k)
    for (std::size_t c = 0; c < t.dim; ++c) gap = std::max(gap, std::abs(t.derivative(k, a, c) - t.derivative(k, b, c)));
  return gap;
}

}  // namespace

SyncResult detect_sync(const Trajectory& traj, double tol, std::size_t window) {
  if (window == 0 || window > traj.samples()) {
    throw ValidationError("sync window must be in [1, " + std::to_string(traj.samples()) + "]");
  }
  if (!(tol >= 0.0)) throw ValidationError("sync tolerance must be nonnegative");
  const std::size_t n = traj.nodes, dim = traj.dim, first = traj.samples() - window;
  const auto d = static_cast<Eigen::Index>(dim);

  std::vector<Eigen::VectorXd> mean(n, Eigen::VectorXd::Zero(d));
  std::vector<std::size_t> stationary;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = first; k < traj.samples(); ++k)
      for (std::size_t c = 0; c < dim; ++c) mean[i](static_cast<Eigen::Index>(c)) += traj.derivative(k, i, c);
    mean[i] /= static_cast<double>(window);
    double dev = 0.0;
    for (std::size_t k = first; k < traj.samples(); ++k)
      for (std::size_t c = 0; c < dim; ++c)
        dev = std::max(dev, std::abs(traj.derivative(k, i, c) - mean[i](static_cast<Eigen::Index>(c))));
    if (dev <= tol) stationary.push_back(i);
  }
  std::stable_sort(stationary.begin(), stationary.end(),
                   [&](std::size_t a, std::size_t b) { return mean[a](0) < mean[b](0); });

  // Greedy sweep in value order; a node joins the open group only if it is
  // within tol of every member.
  std::vector<std::vector<std::size_t>> groups;
  for (auto v : stationary) {
    bool joined = false;
    for (auto& grp : groups) {
      const bool fits = std::all_of(grp.begin(), grp.end(),
                                    [&](std::size_t u) { return max_gap(traj, first, u, v) <= tol; });
      if (fits) {
        grp.push_back(v);
        joined = true;
        break;
      }
    }
    if (!joined) groups.push_back({v});
  }

  SyncResult out;
  out.tol = tol;
  out.window = window;
  std::vector<bool> clustered(n, false);
  for (auto& grp : groups) {
    if (grp.size() < 2 && n > 1) continue;
    std::sort(grp.begin(), grp.end());
    SyncCluster cl;
    cl.nodes = grp;
    cl.value = Eigen::VectorXd::Zero(d);
    for (auto v : grp) cl.value += mean[v];
    cl.value /= static_cast<double>(grp.size());
    for (std::size_t a = 0; a < grp.size(); ++a)
      for (std::size_t b = a + 1; b < grp.size(); ++b) cl.spread = std::max(cl.spread, max_gap(traj, first, grp[a], grp[b]));
    std::size_t since = traj.samples();
    while (since > 0) {
      bool ok = true;
      for (auto v : grp)
        for (std::size_t c = 0; c < dim && ok; ++c)
          ok = std::abs(traj.derivative(since - 1, v, c) - cl.value(static_cast<Eigen::Index>(c))) <= tol;
      if (!ok) break;
      --since;
    }
    cl.detection_time = traj.times(static_cast<Eigen::Index>(std::min(since, traj.samples() - 1)));
    for (auto v : grp) clustered[v] = true;
    out.clusters.push_back(std::move(cl));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) { return a.nodes.front() < b.nodes.front(); });
  for (std::size_t i = 0; i < n; ++i)
    if (!clustered[i]) out.unclustered.push_back(i);
  out.global = out.clusters.size() == 1 && out.clusters.front().nodes.size() == n;
  return out;
}

SyncResult detect_sync(const Trajectory& traj, const SyncDefaults& defaults) {
  if (traj.samples() == 0) throw ValidationError("empty trajectory");
  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(defaults.window_fraction * static_cast<double>(traj.samples()))));
  const double scale = traj.derivatives.bottomRows(static_cast<Eigen::Index>(window)).colwise().mean().cwiseAbs().maxCoeff();
  return detect_sync(traj, std::max(defaults.rel_tol * scale, defaults.abs_floor), window);
}

}  // namespace selfsync
