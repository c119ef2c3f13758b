#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace selfsync {

// Weighted digraph of a sensor network.
//
// Row i of the weight matrix belongs to the receiver: a_ij > 0 means node i
// hears node j, so information flows j -> i. Diagonal is zero.
class SensorDigraph {
 public:
  SensorDigraph() = default;
  // Throws ValidationError for non-square input, negative or non-finite
  // entries and nonzero diagonal entries.
  explicit SensorDigraph(Eigen::MatrixXd weights);

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  double weight(std::size_t receiver, std::size_t transmitter) const {
    return weights_(static_cast<Eigen::Index>(receiver), static_cast<Eigen::Index>(transmitter));
  }
  // N_i: transmitters heard by node i, ascending.
  const std::vector<std::size_t>& neighbors(std::size_t receiver) const { return neighbors_[receiver]; }
  std::size_t edge_count() const noexcept;

 private:
  Eigen::MatrixXd weights_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

struct Degrees {
  Eigen::VectorXd in;   // sum_j a_ij
  Eigen::VectorXd out;  // sum_j a_ji
};

Degrees degrees(const SensorDigraph& g);

constexpr double kBalanceTolerance = 1e-12;

bool is_balanced(const SensorDigraph& g, double tol = kBalanceTolerance);

struct Laplacian {
  Eigen::MatrixXd matrix;  // Delta - A
  Eigen::VectorXd degree;  // in-degrees, the diagonal of Delta
};

Laplacian laplacian(const SensorDigraph& g);

// Rebuilds the digraph whose Laplacian is `L` (a_ij = -L_ij off the diagonal).
SensorDigraph digraph_from_laplacian(const Laplacian& L);

enum class Connectivity { StronglyConnected, QuasiStronglyConnected, WeaklyConnected, Disconnected };

const char* to_string(Connectivity c) noexcept;

// Directed edge of the condensation, oriented along information flow.
struct CondensationEdge {
  std::size_t from;
  std::size_t to;
  bool operator==(const CondensationEdge&) const = default;
};

struct SccDecomposition {
  // Maximal strongly connected components; node lists are ascending.
  std::vector<std::vector<std::size_t>> components;
  // component_of[v] indexes `components`.
  std::vector<std::size_t> component_of;
  std::vector<CondensationEdge> condensation_edges;
  // Permutation of component indices such that every condensation edge goes
  // from an earlier position to a later one; roots come first.
  std::vector<std::size_t> topo_order;
  // Components with no incoming condensation edge, ascending.
  std::vector<std::size_t> root_components;
  Connectivity connectivity = Connectivity::Disconnected;

  std::size_t component_count() const noexcept { return components.size(); }
  bool is_qsc() const noexcept {
    return connectivity == Connectivity::StronglyConnected ||
           connectivity == Connectivity::QuasiStronglyConnected;
  }
  // Nodes of every root component, ascending.
  std::vector<std::size_t> root_nodes() const;
};

SccDecomposition scc_decompose(const SensorDigraph& g);

// Weakly connected components on the undirected skeleton, each ascending,
// ordered by smallest member.
std::vector<std::vector<std::size_t>> weak_components(const SensorDigraph& g);

}  // namespace selfsync
