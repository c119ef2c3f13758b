#include "selfsync/digraph.hpp"
#include "selfsync/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace selfsync;
using testing::MatrixXd;

namespace {

MatrixXd cycle3() {
  MatrixXd a = MatrixXd::Zero(3, 3);
  a(0, 2) = a(1, 0) = a(2, 1) = 1.0;
  return a;
}

testing::Class as_oracle(Connectivity c) {
  switch (c) {
    case Connectivity::StronglyConnected: return testing::Class::SC;
    case Connectivity::QuasiStronglyConnected: return testing::Class::QSC;
    case Connectivity::WeaklyConnected: return testing::Class::WC;
    case Connectivity::Disconnected: return testing::Class::Disconnected;
  }
  return testing::Class::Disconnected;
}

void check_decomposition(const SensorDigraph& g, const SccDecomposition& scc) {
  const auto n = g.size();
  const auto reach = testing::flow_closure(g.weights());
  // Partition and maximality: same component iff mutually reachable.
  REQUIRE(scc.component_of.size() == n);
  std::size_t total = 0;
  for (std::size_t c = 0; c < scc.component_count(); ++c) {
    total += scc.components[c].size();
    CHECK(std::is_sorted(scc.components[c].begin(), scc.components[c].end()));
    for (auto v : scc.components[c]) CHECK(scc.component_of[v] == c);
  }
  CHECK(total == n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      CHECK((scc.component_of[u] == scc.component_of[v]) == (reach[u][v] && reach[v][u]));

  // Topological order: every condensation edge goes forward.
  std::vector<std::size_t> pos(scc.component_count());
  for (std::size_t k = 0; k < scc.topo_order.size(); ++k) pos[scc.topo_order[k]] = k;
  REQUIRE(scc.topo_order.size() == scc.component_count());
  for (const auto& e : scc.condensation_edges) {
    CHECK(e.from != e.to);
    CHECK(pos[e.from] < pos[e.to]);
  }
  // Condensation edges are exactly the inter-component links.
  std::set<std::pair<std::size_t, std::size_t>> expected;
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : g.neighbors(i))
      if (scc.component_of[i] != scc.component_of[j]) expected.insert({scc.component_of[j], scc.component_of[i]});
  std::set<std::pair<std::size_t, std::size_t>> got;
  for (const auto& e : scc.condensation_edges) got.insert({e.from, e.to});
  CHECK(got == expected);

  // Roots: no incoming condensation edge; they match the reachability oracle.
  const auto roots = scc.root_nodes();
  CHECK(roots == testing::brute_force_root_nodes(g.weights()));
  CHECK(scc.root_components.size() == testing::brute_force_root_count(g.weights()));
  CHECK(as_oracle(scc.connectivity) == testing::brute_force_class(g.weights()));
  CHECK(scc.is_qsc() == (scc.root_components.size() == 1));
}

}  // namespace

TEST_CASE("construction validates weights") {
  SensorDigraph empty(MatrixXd::Zero(3, 3));
  for (std::size_t i = 0; i < 3; ++i) CHECK(empty.neighbors(i).empty());
  CHECK(empty.edge_count() == 0);

  MatrixXd neg = MatrixXd::Zero(2, 2);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(SensorDigraph{neg}, ValidationError);
  try {
    SensorDigraph{neg};
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
  MatrixXd diag = MatrixXd::Zero(2, 2);
  diag(1, 1) = 0.5;
  CHECK_THROWS_AS(SensorDigraph{diag}, ValidationError);
  CHECK_THROWS_AS(SensorDigraph{MatrixXd::Zero(2, 3)}, ValidationError);
  MatrixXd nan = MatrixXd::Zero(2, 2);
  nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SensorDigraph{nan}, ValidationError);
}

TEST_CASE("3-cycle neighbor sets") {
  SensorDigraph g(cycle3());
  CHECK(g.neighbors(0) == std::vector<std::size_t>{2});
  CHECK(g.neighbors(1) == std::vector<std::size_t>{0});
  CHECK(g.neighbors(2) == std::vector<std::size_t>{1});
  CHECK(g.edge_count() == 3);
}

TEST_CASE("degrees and balance") {
  const auto d = degrees(SensorDigraph(cycle3()));
  CHECK(d.in.isApprox(Eigen::Vector3d::Ones()));
  CHECK(d.out.isApprox(Eigen::Vector3d::Ones()));
  CHECK(is_balanced(SensorDigraph(cycle3())));

  MatrixXd two = MatrixXd::Zero(2, 2);
  two(0, 1) = 1.0;
  two(1, 0) = 3.0;
  const auto d2 = degrees(SensorDigraph(two));
  CHECK(d2.in(0) == 1.0);
  CHECK(d2.in(1) == 3.0);
  CHECK(d2.out(0) == 3.0);
  CHECK(d2.out(1) == 1.0);
  CHECK_FALSE(is_balanced(SensorDigraph(two)));

  MatrixXd star = MatrixXd::Zero(5, 5);
  for (int j = 1; j < 5; ++j) star(0, j) = 1.0;
  const auto ds = degrees(SensorDigraph(star));
  CHECK(ds.in(0) == 4.0);
  CHECK(ds.out(0) == 0.0);
}

TEST_CASE("balance matches brute-force degree comparison") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd a = testing::random_sc(6, 0.4, rng);
    bool balanced = true;
    for (Eigen::Index i = 0; i < a.rows(); ++i) balanced = balanced && std::abs(a.row(i).sum() - a.col(i).sum()) <= 1e-12;
    CHECK(is_balanced(SensorDigraph(a)) == balanced);
  }
}

TEST_CASE("laplacian") {
  MatrixXd two = MatrixXd::Zero(2, 2);
  two(0, 1) = two(1, 0) = 1.0;
  const auto L = laplacian(SensorDigraph(two));
  MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK(L.matrix == expected);

  const auto L3 = laplacian(SensorDigraph(cycle3()));
  MatrixXd circ(3, 3);
  circ << 1, 0, -1, -1, 1, 0, 0, -1, 1;
  CHECK(L3.matrix == circ);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd a = testing::random_digraph(5, 0.5, rng, 1e-3, 1e3);
    const auto l = laplacian(SensorDigraph(a));
    for (Eigen::Index i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < 5; ++j)
        if (j != i) sum += l.matrix(i, j);
      sum += l.matrix(i, i);
      CHECK(sum == 0.0);
      CHECK(l.matrix(i, i) >= 0.0);
      for (Eigen::Index j = 0; j < 5; ++j)
        if (j != i) CHECK(l.matrix(i, j) == -a(i, j));
    }
    CHECK(digraph_from_laplacian(l).weights() == a);
  }
}

TEST_CASE("balanced digraphs have 1 as a left null vector") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    // Sum of random weighted cycles is balanced.
    const std::size_t n = 3 + testing::pick(rng, 5);
    MatrixXd a = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (int c = 0; c < 3; ++c) {
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      const double w = testing::uniform(rng, 0.5, 1.5);
      for (std::size_t k = 0; k < n; ++k)
        a(static_cast<Eigen::Index>(order[(k + 1) % n]), static_cast<Eigen::Index>(order[k])) += w;
    }
    const SensorDigraph g(a);
    REQUIRE(is_balanced(g, 1e-12));
    const auto L = laplacian(g);
    CHECK((Eigen::RowVectorXd::Ones(L.matrix.cols()) * L.matrix).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("scc examples") {
  const auto c3 = scc_decompose(SensorDigraph(cycle3()));
  CHECK(c3.component_count() == 1);
  CHECK(c3.connectivity == Connectivity::StronglyConnected);

  MatrixXd chain = MatrixXd::Zero(3, 3);
  chain(1, 0) = chain(2, 1) = 1.0;  // e_21, e_32: node 0 reaches all
  const SensorDigraph gc(chain);
  const auto sc = scc_decompose(gc);
  CHECK(sc.component_count() == 3);
  CHECK(sc.root_components.size() == 1);
  CHECK(sc.root_nodes() == std::vector<std::size_t>{0});
  CHECK(sc.connectivity == Connectivity::QuasiStronglyConnected);
  CHECK(testing::brute_force_class(chain) == testing::Class::QSC);
  check_decomposition(gc, sc);

  MatrixXd pairs = MatrixXd::Zero(4, 4);
  pairs(0, 1) = pairs(1, 0) = pairs(2, 3) = pairs(3, 2) = 1.0;
  const auto dp = scc_decompose(SensorDigraph(pairs));
  CHECK(dp.component_count() == 2);
  CHECK(dp.root_components.size() == 2);
  CHECK(dp.connectivity == Connectivity::Disconnected);
  CHECK(weak_components(SensorDigraph(pairs)).size() == 2);

  const auto single = scc_decompose(SensorDigraph(MatrixXd::Zero(1, 1)));
  CHECK(single.connectivity == Connectivity::StronglyConnected);
}

TEST_CASE("scc agrees with brute-force reachability on random digraphs") {
  std::mt19937_64 rng(2024);
  int counts[4] = {0, 0, 0, 0};
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t n = 1 + testing::pick(rng, 8);
    const double density = testing::uniform(rng, 0.05, 0.6);
    const SensorDigraph g(testing::random_digraph(n, density, rng));
    const auto scc = scc_decompose(g);
    ++counts[static_cast<int>(scc.connectivity)];
    check_decomposition(g, scc);
  }
  // The generator must exercise every class.
  for (int c : counts) CHECK(c > 10);
}

TEST_CASE("weak components") {
  MatrixXd a = MatrixXd::Zero(5, 5);
  a(1, 0) = 1.0;
  a(3, 4) = 1.0;
  const auto w = weak_components(SensorDigraph(a));
  REQUIRE(w.size() == 3);
  CHECK(w[0] == std::vector<std::size_t>{0, 1});
  CHECK(w[1] == std::vector<std::size_t>{2});
  CHECK(w[2] == std::vector<std::size_t>{3, 4});
}

TEST_CASE("connectivity names") {
  CHECK(std::string(to_string(Connectivity::StronglyConnected)) == "SC");
  CHECK(std::string(to_string(Connectivity::QuasiStronglyConnected)) == "QSC");
  CHECK(std::string(to_string(Connectivity::WeaklyConnected)) == "WC");
  CHECK(std::string(to_string(Connectivity::Disconnected)) == "Disconnected");
}
