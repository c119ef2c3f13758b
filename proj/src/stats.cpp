#include "selfsync/stats.hpp"

#include "selfsync/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace selfsync {

BlueLocal blue_local(const LinearObsModel& m) {
  const auto rows = m.a_mat.rows(), cols = m.a_mat.cols();
  if (cols == 0 || rows < cols) throw ValidationError("mixing matrix must have M >= L >= 1");
  if (m.r_cov.rows() != rows || m.r_cov.cols() != rows || m.y.size() != rows) {
    throw ValidationError("observation model shapes are inconsistent");
  }
  if (!m.r_cov.isApprox(m.r_cov.transpose(), 1e-12)) throw ValidationError("noise covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> r_llt(m.r_cov);
  if (r_llt.info() != Eigen::Success) throw ValidationError("noise covariance is not positive definite");

  const Eigen::MatrixXd rinv_a = r_llt.solve(m.a_mat);
  BlueLocal out;
  out.c_mat = m.a_mat.transpose() * rinv_a;
  out.c_mat = 0.5 * (out.c_mat + out.c_mat.transpose());
  Eigen::LDLT<Eigen::MatrixXd> c_ldlt(out.c_mat);
  Eigen::FullPivLU<Eigen::MatrixXd> rank(m.a_mat);
  if (rank.rank() < cols || c_ldlt.info() != Eigen::Success || !c_ldlt.isPositive()) {
    throw ValidationError("mixing matrix is not full column rank");
  }
  out.g_vec = c_ldlt.solve(rinv_a.transpose() * m.y);
  return out;
}

Eigen::VectorXd centralized_blue(const std::vector<LinearObsModel>& models) {
  if (models.empty()) throw ValidationError("no observation models");
  std::vector<Eigen::VectorXd> g;
  std::vector<Eigen::MatrixXd> c;
  for (const auto& m : models) {
    auto local = blue_local(m);
    g.push_back(std::move(local.g_vec));
    c.push_back(std::move(local.c_mat));
  }
  return consensus_function(g, c);
}

GlrtLocal glrt_local(const GlrtModel& m) {
  if (!(m.sigma_w2 > 0.0)) throw ValidationError("noise variance must be positive");
  if (m.samples.empty()) throw ValidationError("GLRT needs at least one sample");
  const double energy =
      std::accumulate(m.samples.begin(), m.samples.end(), 0.0, [](double acc, double y) { return acc + y * y; }) /
      static_cast<double>(m.samples.size());
  GlrtLocal out;
  out.power_estimate = std::max(0.0, energy - m.sigma_w2);
  const double total = out.power_estimate + m.sigma_w2;
  out.g = energy * (1.0 / m.sigma_w2 - 1.0 / total) - std::log(total / m.sigma_w2);
  return out;
}

double glrt_statistic(const std::vector<GlrtModel>& models) {
  double t = 0.0;
  for (const auto& m : models) t += glrt_local(m).g;
  return t;
}

double consensus_function(const std::function<double(double)>& h, const Eigen::VectorXd& g_values,
                          const Eigen::VectorXd& c) {
  if (g_values.size() != c.size() || c.size() == 0) throw ValidationError("g and c must be nonempty and equal length");
  if (!(c.array() > 0.0).all()) throw ValidationError("c weights must be positive");
  return h(c.dot(g_values) / c.sum());
}

Eigen::VectorXd consensus_function(const std::vector<Eigen::VectorXd>& g_vecs,
                                   const std::vector<Eigen::MatrixXd>& c_mats) {
  if (g_vecs.empty() || g_vecs.size() != c_mats.size()) throw ValidationError("need one C matrix per g vector");
  const auto dim = g_vecs.front().size();
  Eigen::MatrixXd sum_c = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd sum_cg = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < g_vecs.size(); ++i) {
    if (g_vecs[i].size() != dim || c_mats[i].rows() != dim || c_mats[i].cols() != dim) {
      throw ValidationError("dimension mismatch at node " + std::to_string(i));
    }
    sum_c += c_mats[i];
    sum_cg += c_mats[i] * g_vecs[i];
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sum_c);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
    throw NumericalError("combined information matrix is singular");
  }
  return ldlt.solve(sum_cg);
}

}  // namespace selfsync
