#include "selfsync/spectral.hpp"

#include "selfsync/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace selfsync {

const char* to_string(RateMethod m) noexcept {
  switch (m) {
    case RateMethod::NoDelaySpectrum: return "no_delay_spectrum";
    case RateMethod::KappaBound: return "kappa_bound";
    case RateMethod::EmpiricalFit: return "empirical_fit";
  }
  return "?";
}

Laplacian coupling_laplacian(const SensorDigraph& g, const Eigen::VectorXd& k) {
  if (static_cast<std::size_t>(k.size()) != g.size()) throw ValidationError("gain vector does not match the digraph");
  if (!(k.array() > 0.0).all()) throw ValidationError("gains k_i = K/c_i must be positive");
  return laplacian(SensorDigraph(k.asDiagonal() * g.weights()));
}

std::size_t zero_eigen_multiplicity(const Laplacian& L) {
  return scc_decompose(digraph_from_laplacian(L)).root_components.size();
}

Eigen::VectorXd block_left_null_vector(const Eigen::MatrixXd& block) {
  const Eigen::Index r = block.rows();
  if (r == 1) return Eigen::VectorXd::Ones(1);
  // Rows of L1^T gamma = 0 sum to zero, so the last one is redundant; it is
  // replaced by the normalization sum(gamma) = 1.
  Eigen::MatrixXd m = block.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
  m.row(r - 1).setOnes();
  rhs(r - 1) = 1.0;

  for (Eigen::Index col = 0; col < r; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index row = col + 1; row < r; ++row)
      if (std::abs(m(row, col)) > std::abs(m(pivot, col))) pivot = row;
    if (m(pivot, col) == 0.0) throw NumericalError("singular bordered system while solving for gamma");
    if (pivot != col) {
      m.row(pivot).swap(m.row(col));
      std::swap(rhs(pivot), rhs(col));
    }
    for (Eigen::Index row = col + 1; row < r; ++row) {
      const double f = m(row, col) / m(col, col);
      if (f == 0.0) continue;
      m.row(row).tail(r - col) -= f * m.row(col).tail(r - col);
      rhs(row) -= f * rhs(col);
    }
  }
  Eigen::VectorXd x(r);
  for (Eigen::Index row = r; row-- > 0;) {
    double acc = rhs(row);
    for (Eigen::Index c = row + 1; c < r; ++c) acc -= m(row, c) * x(c);
    x(row) = acc / m(row, row);
  }
  return x;
}

namespace {

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

GammaVector gamma_for_component(const Laplacian& L, const std::vector<std::size_t>& nodes, GammaNormalization norm) {
  const auto r = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd block(r, r);
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < r; ++b)
      block(a, b) = L.matrix(static_cast<Eigen::Index>(nodes[a]), static_cast<Eigen::Index>(nodes[b]));

  const Eigen::VectorXd local = block_left_null_vector(block);
  GammaVector out;
  out.normalization = norm;
  out.gamma = Eigen::VectorXd::Zero(L.matrix.rows());
  for (Eigen::Index a = 0; a < r; ++a) out.gamma(static_cast<Eigen::Index>(nodes[a])) = local(a);
  if (norm == GammaNormalization::InfNormOne) out.gamma /= out.gamma.cwiseAbs().maxCoeff();

  out.residual = (out.gamma.transpose() * L.matrix).cwiseAbs().maxCoeff();
  const double tol = kGammaResidualRel * std::max(inf_norm(L.matrix), std::numeric_limits<double>::min());
  if (out.residual > tol) {
    throw NumericalError("gamma residual " + std::to_string(out.residual) + " exceeds tolerance " + std::to_string(tol));
  }
  for (auto v : nodes) {
    if (!(out.gamma(static_cast<Eigen::Index>(v)) > 0.0)) {
      throw NumericalError("non-positive gamma entry at root node " + std::to_string(v) + " (residual " +
                           std::to_string(out.residual) + ")");
    }
  }
  out.support = nodes;
  return out;
}

void require_laplacian_matches(const Laplacian& L, const SccDecomposition& scc) {
  if (static_cast<std::size_t>(L.matrix.rows()) != scc.component_of.size()) {
    throw ValidationError("SCC decomposition does not match the Laplacian size");
  }
}

}  // namespace

GammaVector gamma_left_eigenvector(const Laplacian& L, const SccDecomposition& scc, GammaNormalization norm) {
  require_laplacian_matches(L, scc);
  if (scc.root_components.size() != 1) {
    throw TopologyError("no single root component: the condensation has " +
                        std::to_string(scc.root_components.size()) + " roots");
  }
  return gamma_for_component(L, scc.components[scc.root_components.front()], norm);
}

std::vector<GammaVector> gamma_per_root(const Laplacian& L, const SccDecomposition& scc, GammaNormalization norm) {
  require_laplacian_matches(L, scc);
  std::vector<GammaVector> out;
  for (auto r : scc.root_components) out.push_back(gamma_for_component(L, scc.components[r], norm));
  return out;
}

RateEstimate rate_no_delay(const Laplacian& L) {
  if (zero_eigen_multiplicity(L) != 1) throw TopologyError("no-delay rate is defined for QSC digraphs only");
  const Eigen::Index n = L.matrix.rows();
  RateEstimate est;
  est.method = RateMethod::NoDelaySpectrum;
  if (n == 1) {
    est.value = -std::numeric_limits<double>::infinity();
    return est;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(L.matrix, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  Eigen::Index zero = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(ev(i)) < std::abs(ev(zero))) zero = i;
  double min_re = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != zero) min_re = std::min(min_re, ev(i).real());
  est.value = -min_re;
  return est;
}

RateEstimate rate_kappa_bound(const Laplacian& L, const GammaVector& gamma) {
  const auto scc = scc_decompose(digraph_from_laplacian(L));
  if (scc.connectivity != Connectivity::StronglyConnected) throw TopologyError("kappa bound requires an SC digraph");
  const Eigen::Index n = L.matrix.rows();
  if (gamma.gamma.size() != n) throw ValidationError("gamma size does not match the Laplacian");
  RateEstimate est;
  est.method = RateMethod::KappaBound;
  if (n == 1) {
    est.value = -std::numeric_limits<double>::infinity();
    return est;
  }
  const Eigen::VectorXd g = gamma.gamma / gamma.gamma.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd dl = g.asDiagonal() * L.matrix;
  const Eigen::MatrixXd sym = 0.5 * (dl + dl.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  est.value = -solver.eigenvalues()(1);

  const double r = rate_no_delay(L).value;
  if (r > est.value + 1e-9 * std::max(1.0, inf_norm(L.matrix))) {
    throw NumericalError("no-delay rate " + std::to_string(r) + " exceeds kappa bound " + std::to_string(est.value));
  }
  return est;
}

namespace {

void check_k(const SensorDigraph& g, const DelayMatrix& delays, const Eigen::VectorXd& k) {
  if (static_cast<std::size_t>(k.size()) != g.size() || delays.size() != g.size()) {
    throw ValidationError("gain vector or delay matrix does not match the digraph");
  }
  if (!(k.array() > 0.0).all()) throw ValidationError("gains k_i = K/c_i must be positive");
}

}  // namespace

std::complex<double> characteristic_function(std::complex<double> s, const SensorDigraph& g,
                                             const DelayMatrix& delays, const Eigen::VectorXd& k) {
  check_k(g, delays, k);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto deg = degrees(g).in;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = s + k(i) * deg(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || g.weights()(i, j) == 0.0) continue;
      m(i, j) = -k(i) * g.weights()(i, j) * std::exp(-s * delays.tau()(i, j));
    }
  }
  return m.partialPivLu().determinant();
}

double characteristic_scale(const SensorDigraph& g, const Eigen::VectorXd& k) {
  const auto deg = degrees(g).in;
  double scale = 1.0;
  for (Eigen::Index i = 0; i < deg.size(); ++i) scale *= std::max(1.0, 2.0 * k(i) * deg(i));
  return scale;
}

double delayed_loop_row_gain(double omega, const SensorDigraph& g, const DelayMatrix& delays,
                             const Eigen::VectorXd& k) {
  check_k(g, delays, k);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto deg = degrees(g).in;
  const std::complex<double> jw(0.0, omega);
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> diag = jw + k(i) * deg(i);
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || g.weights()(i, j) == 0.0) continue;
      row += std::abs(k(i) * g.weights()(i, j) * std::exp(-jw * delays.tau()(i, j)) / diag);
    }
    best = std::max(best, row);
  }
  return best;
}

RateEstimate empirical_rate(const Trajectory& traj, const Eigen::VectorXd& omega_star) {
  if (!traj.sync || !traj.sync->global) throw ValidationError("empirical rate needs a globally synchronized trajectory");
  if (static_cast<std::size_t>(omega_star.size()) != traj.dim) throw ValidationError("omega* dimension mismatch");
  const std::size_t samples = traj.samples();
  std::vector<double> err(samples, 0.0);
  for (std::size_t k = 0; k < samples; ++k)
    for (std::size_t i = 0; i < traj.nodes; ++i)
      for (std::size_t c = 0; c < traj.dim; ++c)
        err[k] = std::max(err[k], std::abs(traj.derivative(k, i, c) - omega_star(static_cast<Eigen::Index>(c))));

  RateEstimate est;
  est.method = RateMethod::EmpiricalFit;
  const double peak = *std::max_element(err.begin(), err.end());
  const double scale = std::max(1.0, omega_star.cwiseAbs().maxCoeff());
  const double floor = std::max(1e-10 * scale, 1e-12 * peak);

  // Fit window: from the first sample two decades below the peak until the
  // error first reaches the rounding floor.
  std::size_t first = 0;
  while (first < samples && err[first] > 1e-2 * peak) ++first;
  std::size_t last = first;
  while (last < samples && err[last] > floor) ++last;
  est.fit_samples = last - first;
  if (peak <= floor || est.fit_samples < 10) {
    est.degenerate = true;
    return est;
  }

  double st = 0, sy = 0, stt = 0, sty = 0;
  const double m = static_cast<double>(est.fit_samples);
  for (std::size_t k = first; k < last; ++k) {
    const double t = traj.times(static_cast<Eigen::Index>(k)), y = std::log(err[k]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double slope = (m * sty - st * sy) / (m * stt - st * st);
  const double intercept = (sy - slope * st) / m;
  double ss = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const double r = std::log(err[k]) - (intercept + slope * traj.times(static_cast<Eigen::Index>(k)));
    ss += r * r;
  }
  est.value = slope;
  est.residual = std::sqrt(ss / m);
  return est;
}

}  // namespace selfsync
