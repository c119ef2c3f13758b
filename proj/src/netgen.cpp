#include "selfsync/netgen.hpp"

#include "selfsync/error.hpp"

#include <cmath>
#include <tuple>
#include <vector>

namespace selfsync {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng CounterRng::substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return CounterRng(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL)));
}

CounterRng::result_type CounterRng::operator()() noexcept {
  return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++);
}

double CounterRng::uniform() noexcept {
  // 53 random bits, shifted off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

NodeGeometry place_nodes(std::size_t n, double side, std::uint64_t seed) {
  if (n == 0) throw ValidationError("node count must be at least 1");
  if (!(side > 0.0) || !std::isfinite(side)) throw ValidationError("square side must be positive");
  const auto m = static_cast<Eigen::Index>(n);
  NodeGeometry g;
  g.side = side;
  g.positions.resize(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto rng = CounterRng::substream(seed, 0x6e6f6465 /* "node" */, static_cast<std::uint64_t>(i));
    g.positions(i, 0) = side * rng.uniform();
    g.positions(i, 1) = side * rng.uniform();
  }
  g.distances = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      g.distances(i, j) = g.distances(j, i) = (g.positions.row(i) - g.positions.row(j)).norm();
  g.powers = Eigen::VectorXd::Ones(m);
  g.offsets = Eigen::MatrixXd::Zero(m, m);
  return g;
}

SensorDigraph channel_rayleigh(const NodeGeometry& geom, std::uint64_t seed, RayleighConvention convention) {
  const auto m = static_cast<Eigen::Index>(geom.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d = geom.distances(i, j);
      const double sigma2 = geom.powers(j) / (1.0 + d * d);
      // Rayleigh(s): E[a^2] = 2 s^2.
      const double s2 = convention == RayleighConvention::SecondMoment ? 0.5 * sigma2 : sigma2;
      auto rng = CounterRng::substream(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j) + 1);
      a(i, j) = std::sqrt(-2.0 * s2 * std::log(rng.uniform()));
    }
  }
  return SensorDigraph(std::move(a));
}

SensorDigraph channel_pathloss(const NodeGeometry& geom, const Eigen::MatrixXd& fading) {
  const auto m = static_cast<Eigen::Index>(geom.size());
  if (fading.rows() != m || fading.cols() != m) throw ValidationError("fading matrix shape mismatch");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d = geom.distances(i, j);
      if (!(d > 0.0)) {
        throw ValidationError("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                              " are co-located; path-loss amplitude is singular");
      }
      const double h = std::abs(fading(i, j));
      a(i, j) = std::sqrt(geom.powers(j) * h * h / std::pow(d, geom.path_loss_exponent));
    }
  }
  return SensorDigraph(std::move(a));
}

SensorDigraph threshold_prune(const SensorDigraph& g, double min_amplitude) {
  if (!(min_amplitude >= 0.0)) throw ValidationError("threshold must be nonnegative");
  Eigen::MatrixXd a = g.weights();
  a = a.unaryExpr([min_amplitude](double v) { return v < min_amplitude ? 0.0 : v; });
  return SensorDigraph(std::move(a));
}

DelayMatrix delays_from_geometry(const NodeGeometry& geom) {
  Eigen::MatrixXd tau = geom.offsets;
  if (std::isfinite(geom.speed)) tau += geom.distances / geom.speed;
  tau.diagonal().setZero();
  return DelayMatrix(std::move(tau));
}

double speed_for_max_delay(const NodeGeometry& geom, double tau_max) {
  if (!(tau_max > 0.0)) throw ValidationError("maximum delay must be positive");
  const double dmax = geom.distances.size() ? geom.distances.maxCoeff() : 0.0;
  if (dmax == 0.0) return std::numeric_limits<double>::infinity();
  return dmax / tau_max;
}

namespace {

struct Link {
  std::size_t to;
  std::size_t from;
};

// Deterministic weights in [0.5, 1.5].
double link_weight(std::size_t i, std::size_t j) {
  return 0.5 + 0.25 * static_cast<double>((3 * i + 5 * j) % 5);
}

void add_ring(std::vector<Link>& links, std::size_t first, std::size_t last) {
  for (std::size_t v = first; v < last; ++v) links.push_back({v + 1, v});
  links.push_back({first, last});
}

SensorDigraph from_links(std::size_t n, const std::vector<Link>& links) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (const auto& l : links) a(static_cast<Eigen::Index>(l.to), static_cast<Eigen::Index>(l.from)) = link_weight(l.to, l.from);
  return SensorDigraph(std::move(a));
}

}  // namespace

SensorDigraph reference_topology(ReferenceTopology kind) {
  constexpr std::size_t n = 14;
  std::vector<Link> links;
  switch (kind) {
    case ReferenceTopology::StronglyConnected:
      add_ring(links, 0, 13);
      links.insert(links.end(), {{0, 7}, {5, 11}, {10, 3}, {3, 12}});
      break;
    case ReferenceTopology::ThreeScc:
      add_ring(links, 0, 4);
      links.push_back({2, 0});
      add_ring(links, 5, 9);
      links.push_back({7, 9});
      add_ring(links, 10, 13);
      links.insert(links.end(), {{5, 2}, {8, 4}, {10, 7}, {12, 1}});
      break;
    case ReferenceTopology::TwoRootForest:
      // Two root rings; every downstream node hears both trees (directly or
      // through an earlier downstream node) so no two settle at one value.
      add_ring(links, 0, 3);
      links.push_back({2, 0});
      add_ring(links, 4, 7);
      links.insert(links.end(), {{8, 1}, {8, 5}, {9, 8}, {9, 2}, {10, 9}, {10, 6}, {10, 3},
                                 {11, 10}, {11, 7}, {12, 11}, {12, 0}, {13, 12}, {13, 4}, {13, 9}});
      break;
  }
  return from_links(n, links);
}

ReferenceTopology parse_reference_topology(const std::string& name) {
  if (name == "sc") return ReferenceTopology::StronglyConnected;
  if (name == "qsc3") return ReferenceTopology::ThreeScc;
  if (name == "wc2") return ReferenceTopology::TwoRootForest;
  throw ValidationError("unknown reference topology '" + name + "' (expected sc, qsc3 or wc2)");
}

}  // namespace selfsync
