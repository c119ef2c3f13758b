#include "selfsync/dde_sim.hpp"
#include "selfsync/error.hpp"
#include "selfsync/netgen.hpp"
#include "selfsync/spectral.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace selfsync;
using testing::MatrixXd;
using testing::VectorXd;

namespace {

MatrixXd cycle3() {
  MatrixXd a = MatrixXd::Zero(3, 3);
  a(0, 2) = a(1, 0) = a(2, 1) = 1.0;
  return a;
}

Laplacian lap(const MatrixXd& a) { return laplacian(SensorDigraph(a)); }

// -min Re of the nonzero eigenvalues, from the dense solver.
double oracle_rate(const MatrixXd& l) {
  Eigen::EigenSolver<MatrixXd> es(l, false);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < l.rows(); ++k)
    if (std::abs(es.eigenvalues()(k)) > 1e-9) best = std::min(best, es.eigenvalues()(k).real());
  return -best;
}

}  // namespace

TEST_CASE("zero eigenvalue multiplicity") {
  CHECK(zero_eigen_multiplicity(lap(cycle3())) == 1);
  MatrixXd two = MatrixXd::Zero(6, 6);
  two.topLeftCorner(3, 3) = cycle3();
  two.bottomRightCorner(3, 3) = cycle3();
  CHECK(zero_eigen_multiplicity(lap(two)) == 2);
  CHECK(testing::numeric_zero_count(testing::laplacian_oracle(two), 1e-8) == 2);
}

TEST_CASE("structural multiplicity agrees with the dense eigensolver") {
  std::mt19937_64 rng(77);
  int multi = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + testing::pick(rng, 8);
    const MatrixXd a = testing::random_digraph(n, testing::uniform(rng, 0.05, 0.6), rng);
    const auto m = zero_eigen_multiplicity(lap(a));
    CHECK(m == testing::numeric_zero_count(testing::laplacian_oracle(a), 1e-8));
    multi += m > 1;
  }
  CHECK(multi > 20);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd a = testing::random_qsc(1 + testing::pick(rng, 8), 0.2, rng);
    CHECK(zero_eigen_multiplicity(lap(a)) == 1);
    CHECK(testing::numeric_zero_count(testing::laplacian_oracle(a), 1e-8) == 1);
  }
}

TEST_CASE("gamma examples") {
  const auto L = lap(cycle3());
  const auto g = gamma_left_eigenvector(L, scc_decompose(SensorDigraph(cycle3())));
  for (int i = 0; i < 3; ++i) CHECK(g.gamma(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(g.support == std::vector<std::size_t>{0, 1, 2});

  MatrixXd chain = MatrixXd::Zero(3, 3);
  chain(1, 0) = chain(2, 1) = 1.0;
  const auto gc = gamma_left_eigenvector(lap(chain), scc_decompose(SensorDigraph(chain)));
  CHECK(gc.gamma == Eigen::Vector3d(1.0, 0.0, 0.0));
  CHECK(gc.support == std::vector<std::size_t>{0});

  // Balanced SC: gamma proportional to ones.
  MatrixXd bal = cycle3() + 2.0 * cycle3().transpose();
  const auto gb = gamma_left_eigenvector(lap(bal), scc_decompose(SensorDigraph(bal)), GammaNormalization::InfNormOne);
  CHECK((gb.gamma - VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(gb.normalization == GammaNormalization::InfNormOne);

  MatrixXd pairs = MatrixXd::Zero(4, 4);
  pairs(0, 1) = pairs(1, 0) = pairs(2, 3) = pairs(3, 2) = 1.0;
  const auto Lp = lap(pairs);
  const auto sp = scc_decompose(SensorDigraph(pairs));
  CHECK_THROWS_AS(gamma_left_eigenvector(Lp, sp), TopologyError);
  const auto per = gamma_per_root(Lp, sp);
  REQUIRE(per.size() == 2);
  CHECK(per[0].gamma == Eigen::Vector4d(0.5, 0.5, 0.0, 0.0));
  CHECK(per[1].gamma == Eigen::Vector4d(0.0, 0.0, 0.5, 0.5));
}

TEST_CASE("gamma on random QSC digraphs: residual, support and oracle agreement") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + testing::pick(rng, 8);
    const MatrixXd a = testing::random_qsc(n, testing::uniform(rng, 0.0, 0.5), rng);
    const auto L = lap(a);
    const auto scc = scc_decompose(SensorDigraph(a));
    const auto g = gamma_left_eigenvector(L, scc);
    const double norm = L.matrix.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(g.residual <= 1e-10 * std::max(norm, 1e-300));
    CHECK((g.gamma.transpose() * L.matrix).cwiseAbs().maxCoeff() <= 1e-10 * std::max(norm, 1.0));
    CHECK(g.support == testing::brute_force_root_nodes(a));
    for (Eigen::Index i = 0; i < g.gamma.size(); ++i) {
      const bool in_support = std::find(g.support.begin(), g.support.end(), static_cast<std::size_t>(i)) != g.support.end();
      if (in_support) CHECK(g.gamma(i) > 0.0);
      else CHECK(g.gamma(i) == 0.0);
    }
    CHECK(std::abs(g.gamma.sum() - 1.0) < 1e-12);
    CHECK((g.gamma - testing::svd_left_null(testing::laplacian_oracle(a))).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gamma per root on multi-root digraphs") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd a = testing::random_two_root(3 + testing::pick(rng, 6), rng);
    const auto L = lap(a);
    const auto scc = scc_decompose(SensorDigraph(a));
    REQUIRE(scc.root_components.size() == 2);
    const auto per = gamma_per_root(L, scc);
    REQUIRE(per.size() == 2);
    for (std::size_t r = 0; r < 2; ++r) {
      CHECK(per[r].support == scc.components[scc.root_components[r]]);
      CHECK((per[r].gamma.transpose() * L.matrix).cwiseAbs().maxCoeff() < 1e-10 * L.matrix.cwiseAbs().maxCoeff() * 10);
    }
  }
}

TEST_CASE("block left null vector solves the bordered system") {
  MatrixXd l(3, 3);
  l << 3, -2, -1, 0, 1, -1, -1, 0, 1;  // a_12=2, a_13=1, a_23=1, a_31=1
  const VectorXd g = block_left_null_vector(l);
  CHECK((g.transpose() * l).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g.sum() == doctest::Approx(1.0));
  CHECK((g - testing::svd_left_null(l)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("no-delay rate examples") {
  MatrixXd k3 = MatrixXd::Ones(3, 3);
  k3.diagonal().setZero();
  CHECK(rate_no_delay(lap(k3)).value == doctest::Approx(-3.0));
  MatrixXd p2 = MatrixXd::Zero(2, 2);
  p2(0, 1) = p2(1, 0) = 1.0;
  CHECK(rate_no_delay(lap(p2)).value == doctest::Approx(-2.0));
  CHECK(rate_no_delay(lap(cycle3())).value == doctest::Approx(-1.5));
  CHECK(rate_no_delay(lap(cycle3())).method == RateMethod::NoDelaySpectrum);

  MatrixXd pairs = MatrixXd::Zero(4, 4);
  pairs(0, 1) = pairs(1, 0) = pairs(2, 3) = pairs(3, 2) = 1.0;
  CHECK_THROWS_AS(rate_no_delay(lap(pairs)), TopologyError);

  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd a = testing::random_qsc(2 + testing::pick(rng, 7), 0.3, rng);
    const double r = rate_no_delay(lap(a)).value;
    CHECK(r < 0.0);
    CHECK(r == doctest::Approx(oracle_rate(testing::laplacian_oracle(a))).epsilon(1e-9));
  }
}

TEST_CASE("kappa bound") {
  // Undirected graph: kappa is minus the algebraic connectivity.
  MatrixXd path = MatrixXd::Zero(4, 4);
  for (int i = 0; i < 3; ++i) path(i, i + 1) = path(i + 1, i) = 1.0;
  const auto Lp = lap(path);
  const auto gp = gamma_left_eigenvector(Lp, scc_decompose(SensorDigraph(path)), GammaNormalization::InfNormOne);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(testing::laplacian_oracle(path));
  CHECK(rate_kappa_bound(Lp, gp).value == doctest::Approx(-es.eigenvalues()(1)));

  // Balanced digraph: D_gamma = I.
  MatrixXd bal = cycle3() + 2.0 * cycle3().transpose();
  const auto Lb = lap(bal);
  const auto gb = gamma_left_eigenvector(Lb, scc_decompose(SensorDigraph(bal)));
  const MatrixXd sym = 0.5 * (Lb.matrix + Lb.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eb(sym);
  CHECK(rate_kappa_bound(Lb, gb).value == doctest::Approx(-eb.eigenvalues()(1)));

  const auto Lc = lap(cycle3());
  const auto gc = gamma_left_eigenvector(Lc, scc_decompose(SensorDigraph(cycle3())));
  CHECK(rate_kappa_bound(Lc, gc).value == doctest::Approx(-1.5));
  CHECK(rate_kappa_bound(Lc, gc).method == RateMethod::KappaBound);

  MatrixXd chain = MatrixXd::Zero(3, 3);
  chain(1, 0) = chain(2, 1) = 1.0;
  const auto Lq = lap(chain);
  CHECK_THROWS_AS(rate_kappa_bound(Lq, gamma_left_eigenvector(Lq, scc_decompose(SensorDigraph(chain)))), TopologyError);
}

TEST_CASE("no-delay rate never exceeds the kappa bound on SC digraphs") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd a = testing::random_sc(2 + testing::pick(rng, 7), testing::uniform(rng, 0.0, 0.6), rng);
    const auto L = lap(a);
    const auto g = gamma_left_eigenvector(L, scc_decompose(SensorDigraph(a)));
    const double r = rate_no_delay(L).value;
    const double kappa = rate_kappa_bound(L, g).value;
    CHECK(r <= kappa + 1e-9);
    CHECK(kappa < 0.0);
  }
}

TEST_CASE("coupling laplacian scales rows") {
  const VectorXd k = Eigen::Vector3d(2.0, 3.0, 0.5);
  const auto L = coupling_laplacian(SensorDigraph(cycle3()), k);
  CHECK(L.matrix == k.asDiagonal() * testing::laplacian_oracle(cycle3()));
  CHECK_THROWS_AS(coupling_laplacian(SensorDigraph(cycle3()), Eigen::Vector3d(1.0, 0.0, 1.0)), ValidationError);
}

TEST_CASE("characteristic function examples") {
  const SensorDigraph one(MatrixXd::Zero(1, 1));
  for (auto s : {std::complex<double>(0.3, 0.0), std::complex<double>(-1.0, 2.0)})
    CHECK(std::abs(characteristic_function(s, one, DelayMatrix::zeros(1), VectorXd::Ones(1)) - s) < 1e-15);

  MatrixXd p2 = MatrixXd::Zero(2, 2);
  p2(0, 1) = p2(1, 0) = 1.0;
  for (auto s : {std::complex<double>(0.5, 0.0), std::complex<double>(1.0, -2.0), std::complex<double>(-3.0, 0.25)}) {
    // det [[s+1, -1], [-1, s+1]] = s (s + 2).
    const auto p = characteristic_function(s, SensorDigraph(p2), DelayMatrix::zeros(2), VectorXd::Ones(2));
    CHECK(std::abs(p - s * (s + 2.0)) < 1e-12);
  }

  // Delayed 2-node: det = (s+k1)(s+k2) - k1 k2 e^{-s(t12 + t21)}.
  MatrixXd tau = MatrixXd::Zero(2, 2);
  tau(0, 1) = 0.3;
  tau(1, 0) = 0.7;
  const VectorXd k = Eigen::Vector2d(2.0, 5.0);
  const std::complex<double> s(0.4, 1.1);
  const auto p = characteristic_function(s, SensorDigraph(p2), DelayMatrix(tau), k);
  CHECK(std::abs(p - ((s + 2.0) * (s + 5.0) - 10.0 * std::exp(-s * 1.0))) < 1e-12);
}

TEST_CASE("p(0) vanishes and the delayed loop gain is below one off the origin") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + testing::pick(rng, 8);
    const SensorDigraph g(testing::random_digraph(n, testing::uniform(rng, 0.1, 0.7), rng));
    MatrixXd tau = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    VectorXd k(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
      k(i) = testing::uniform(rng, 0.5, 30.0);
      for (Eigen::Index j = 0; j < tau.cols(); ++j)
        if (i != j) tau(i, j) = testing::uniform(rng, 0.0, 0.2);
    }
    const DelayMatrix d(tau);
    const auto p0 = characteristic_function(0.0, g, d, k);
    CHECK(std::abs(p0) <= 1e-10 * characteristic_scale(g, k));
    const double g0 = delayed_loop_row_gain(0.0, g, d, k);
    CHECK(g0 <= 1.0 + 1e-12);
    for (int w = 1; w <= 20; ++w) {
      const double omega = std::pow(10.0, -2.0 + 4.0 * w / 20.0) * (w % 2 ? 1.0 : -1.0);
      const double gw = delayed_loop_row_gain(omega, g, d, k);
      CHECK(gw <= 1.0);
      if (g.edge_count() > 0) CHECK(gw < 1.0);
    }
  }
}

TEST_CASE("empirical rate") {
  const SensorDigraph g(cycle3());
  SimConfig cfg;
  cfg.t_step = 1e-3;
  cfg.horizon = 40000;
  const VectorXd gv = Eigen::Vector3d(1.0, 2.0, 6.0);
  auto t = simulate(g, DelayMatrix::zeros(3), cfg, gv);
  t.sync = detect_sync(t);
  REQUIRE(t.sync->global);
  const auto est = empirical_rate(t, VectorXd::Constant(1, 3.0));
  CHECK_FALSE(est.degenerate);
  CHECK(est.method == RateMethod::EmpiricalFit);
  const double r = rate_no_delay(laplacian(g)).value;
  CHECK(std::abs(est.value - r) <= 0.1 * std::abs(r));

  // Already synchronized: nothing to fit.
  cfg.init = InitialHistory::constant(Eigen::Vector3d(1.0, 1.0, 1.0));
  auto flat = simulate(g, DelayMatrix::zeros(3), cfg, VectorXd::Constant(3, 2.0));
  flat.sync = detect_sync(flat);
  REQUIRE(flat.sync->global);
  CHECK(empirical_rate(flat, VectorXd::Constant(1, 2.0)).degenerate);

  // Delayed reference SC scenario: strictly negative fitted rate.
  const auto ref = reference_topology(ReferenceTopology::StronglyConnected);
  SimConfig rc;
  rc.k_gain = 30.0;
  rc.horizon = 20000;
  VectorXd rg(14);
  for (int i = 0; i < 14; ++i) rg(i) = 1.0 + 0.05 * i;
  auto rt = simulate(ref, DelayMatrix::uniform(14, 0.05), rc, rg);
  rt.sync = detect_sync(rt);
  REQUIRE(rt.sync->global);
  const auto re = empirical_rate(rt, rt.sync->clusters[0].value);
  CHECK_FALSE(re.degenerate);
  CHECK(re.value < 0.0);

  Trajectory unsynced = t;
  unsynced.sync.reset();
  CHECK_THROWS_AS(empirical_rate(unsynced, VectorXd::Constant(1, 3.0)), ValidationError);
}
