#pragma once

// Test-side oracles and random instance builders. Nothing here calls the
// library's structural algorithms, so the tests compare two independent
// computations.

#include "selfsync/digraph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// flows[u][v]: information starting at u reaches v (a path of a_vu > 0 links).
inline std::vector<std::vector<bool>> flow_closure(const MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t u = 0; u < n; ++u) {
    r[u][u] = true;
    for (std::size_t v = 0; v < n; ++v)
      if (a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) > 0.0) r[u][v] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

enum class Class { SC, QSC, WC, Disconnected };

// Classification from pairwise reachability alone.
inline Class brute_force_class(const MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto r = flow_closure(a);
  bool sc = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sc = sc && r[i][j];
  if (sc) return Class::SC;
  for (std::size_t root = 0; root < n; ++root) {
    bool all = true;
    for (std::size_t j = 0; j < n; ++j) all = all && r[root][j];
    if (all) return Class::QSC;
  }
  const MatrixXd sym = a + a.transpose();
  const auto u = flow_closure(sym);
  for (std::size_t j = 0; j < n; ++j)
    if (!u[0][j]) return Class::Disconnected;
  return Class::WC;
}

// Nodes that reach every node that reaches them: members of root SCCs.
inline std::vector<std::size_t> brute_force_root_nodes(const MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto r = flow_closure(a);
  std::vector<std::size_t> roots;
  for (std::size_t v = 0; v < n; ++v) {
    bool root = true;
    for (std::size_t u = 0; u < n; ++u)
      if (r[u][v] && !r[v][u]) root = false;
    if (root) roots.push_back(v);
  }
  return roots;
}

// Number of root SCCs from reachability: classes of mutually reachable root nodes.
inline std::size_t brute_force_root_count(const MatrixXd& a) {
  const auto roots = brute_force_root_nodes(a);
  const auto r = flow_closure(a);
  std::vector<bool> seen(roots.size(), false);
  std::size_t count = 0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (seen[k]) continue;
    ++count;
    for (std::size_t m = k; m < roots.size(); ++m)
      if (r[roots[k]][roots[m]]) seen[m] = true;
  }
  return count;
}

inline MatrixXd random_digraph(std::size_t n, double density, std::mt19937_64& rng, double lo = 0.5,
                               double hi = 1.5) {
  MatrixXd a = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && uniform(rng, 0.0, 1.0) < density)
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = uniform(rng, lo, hi);
  return a;
}

// Random spanning tree rooted at a random node (information flows from the
// root) plus extra random links.
inline MatrixXd random_qsc(std::size_t n, double extra, std::mt19937_64& rng, double lo = 0.5, double hi = 1.5) {
  MatrixXd a = random_digraph(n, extra, rng, lo, hi);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 1; k < n; ++k) {
    const auto parent = order[pick(rng, k)];
    a(static_cast<Eigen::Index>(order[k]), static_cast<Eigen::Index>(parent)) = uniform(rng, lo, hi);
  }
  return a;
}

// Strongly connected: a random Hamiltonian cycle plus extra links.
inline MatrixXd random_sc(std::size_t n, double extra, std::mt19937_64& rng, double lo = 0.5, double hi = 1.5) {
  MatrixXd a = random_digraph(n, extra, rng, lo, hi);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < n && n > 1; ++k) {
    a(static_cast<Eigen::Index>(order[(k + 1) % n]), static_cast<Eigen::Index>(order[k])) = uniform(rng, lo, hi);
  }
  return a;
}

// Weakly connected with at least two root SCCs: two SC root blocks, each
// feeding a shared downstream block that never feeds back. Needs n >= 3.
inline MatrixXd random_two_root(std::size_t n, std::mt19937_64& rng, double lo = 0.5, double hi = 1.5) {
  const std::size_t r1 = 1 + pick(rng, (n - 1) / 3 + 1);
  const std::size_t r2 = 1 + pick(rng, (n - r1 - 1) / 2 + 1);
  const std::size_t rest = n - r1 - r2;
  MatrixXd a = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto i = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  auto place = [&](std::size_t off, std::size_t size) {
    const MatrixXd block = random_sc(size, 0.3, rng, lo, hi);
    a.block(i(off), i(off), i(size), i(size)) = block;
  };
  place(0, r1);
  place(r1, r2);
  place(r1 + r2, rest);
  a(i(r1 + r2 + pick(rng, rest)), i(pick(rng, r1))) = uniform(rng, lo, hi);
  a(i(r1 + r2 + pick(rng, rest)), i(r1 + pick(rng, r2))) = uniform(rng, lo, hi);
  for (std::size_t v = r1 + r2; v < n; ++v)
    if (uniform(rng, 0.0, 1.0) < 0.3) a(i(v), i(pick(rng, r1 + r2))) = uniform(rng, lo, hi);
  return a;
}

inline MatrixXd laplacian_oracle(const MatrixXd& a) {
  MatrixXd l = -a;
  for (Eigen::Index r = 0; r < a.rows(); ++r) l(r, r) = a.row(r).sum();
  return l;
}

// Eigenvalues with |lambda| <= tol * max(1, ||L||_inf), from the dense solver.
inline std::size_t numeric_zero_count(const MatrixXd& l, double tol) {
  Eigen::EigenSolver<MatrixXd> es(l, false);
  const double scale = std::max(1.0, l.cwiseAbs().rowwise().sum().maxCoeff());
  std::size_t count = 0;
  for (Eigen::Index k = 0; k < l.rows(); ++k)
    if (std::abs(es.eigenvalues()(k)) <= tol * scale) ++count;
  return count;
}

// Left null vector from the dense SVD of L^T, sign-fixed and sum-normalized.
inline VectorXd svd_left_null(const MatrixXd& l) {
  Eigen::JacobiSVD<MatrixXd> svd(l.transpose(), Eigen::ComputeFullV);
  VectorXd v = svd.matrixV().col(l.cols() - 1);
  if (v.sum() < 0) v = -v;
  return v / v.sum();
}

inline bool near_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(b), 1e-300);
}

}  // namespace testing
