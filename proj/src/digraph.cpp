#include "selfsync/digraph.hpp"

#include "selfsync/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace selfsync {

SensorDigraph::SensorDigraph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols()) {
    throw ValidationError("weight matrix must be square, got " + std::to_string(weights_.rows()) + "x" +
                          std::to_string(weights_.cols()));
  }
  if (weights_.rows() == 0) throw ValidationError("digraph needs at least one node");
  const auto n = static_cast<std::size_t>(weights_.rows());
  neighbors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = weight(i, j);
      if (!std::isfinite(a)) {
        throw ValidationError("non-finite weight at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (a < 0.0) {
        throw ValidationError("negative weight " + std::to_string(a) + " at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
      if (i == j) {
        if (a != 0.0) throw ValidationError("self-loop at node " + std::to_string(i) + " (diagonal must be 0)");
        continue;
      }
      if (a > 0.0) neighbors_[i].push_back(j);
    }
  }
}

std::size_t SensorDigraph::edge_count() const noexcept {
  std::size_t count = 0;
  for (const auto& n : neighbors_) count += n.size();
  return count;
}

Degrees degrees(const SensorDigraph& g) {
  return {g.weights().rowwise().sum(), g.weights().colwise().sum().transpose()};
}

bool is_balanced(const SensorDigraph& g, double tol) {
  const auto d = degrees(g);
  return ((d.in - d.out).array().abs() <= tol).all();
}

Laplacian laplacian(const SensorDigraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Laplacian L{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      L.matrix(i, j) = -g.weights()(i, j);
      row += L.matrix(i, j);
    }
    // Diagonal is minus the accumulated off-diagonal sum so rows cancel exactly.
    L.matrix(i, i) = -row;
    L.degree(i) = -row;
  }
  return L;
}

SensorDigraph digraph_from_laplacian(const Laplacian& L) {
  Eigen::MatrixXd a = -L.matrix;
  a.diagonal().setZero();
  // Off-diagonal entries of a Laplacian are <= 0; clear signed zeros.
  a = a.unaryExpr([](double v) { return v == 0.0 ? 0.0 : v; });
  return SensorDigraph(std::move(a));
}

const char* to_string(Connectivity c) noexcept {
  switch (c) {
    case Connectivity::StronglyConnected: return "SC";
    case Connectivity::QuasiStronglyConnected: return "QSC";
    case Connectivity::WeaklyConnected: return "WC";
    case Connectivity::Disconnected: return "Disconnected";
  }
  return "?";
}

std::vector<std::size_t> SccDecomposition::root_nodes() const {
  std::vector<std::size_t> nodes;
  for (auto r : root_components) nodes.insert(nodes.end(), components[r].begin(), components[r].end());
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

namespace {

constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);

// Iterative Tarjan over the information-flow adjacency (j -> i when a_ij > 0).
std::vector<std::vector<std::size_t>> tarjan(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  std::vector<Frame> call;

  for (std::size_t start = 0; start < n; ++start) {
    if (index[start] != kUnvisited) continue;
    call.push_back({start, 0});
    index[start] = low[start] = counter++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!call.empty()) {
      auto& f = call.back();
      if (f.next < succ[f.v].size()) {
        const std::size_t w = succ[f.v][f.next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        sccs.push_back(std::move(comp));
      }
    }
  }
  return sccs;
}

}  // namespace

std::vector<std::vector<std::size_t>> weak_components(const SensorDigraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : g.neighbors(i)) {
      auto a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> slot(n, kUnvisited);
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = find(v);
    if (slot[r] == kUnvisited) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].push_back(v);
  }
  return out;
}

SccDecomposition scc_decompose(const SensorDigraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : g.neighbors(i)) succ[j].push_back(i);

  SccDecomposition d;
  d.components = tarjan(succ);
  // Canonical numbering: by smallest member node.
  std::sort(d.components.begin(), d.components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  const std::size_t k = d.components.size();
  d.component_of.assign(n, 0);
  for (std::size_t c = 0; c < k; ++c)
    for (auto v : d.components[c]) d.component_of[v] = c;

  std::vector<std::vector<bool>> seen(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : g.neighbors(i)) {
      const auto from = d.component_of[j], to = d.component_of[i];
      if (from != to && !seen[from][to]) {
        seen[from][to] = true;
        d.condensation_edges.push_back({from, to});
      }
    }
  }
  std::sort(d.condensation_edges.begin(), d.condensation_edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });

  // Kahn's algorithm: repeatedly peel a zero in-degree component.
  std::vector<std::size_t> indeg(k, 0);
  std::vector<std::vector<std::size_t>> out(k);
  for (const auto& e : d.condensation_edges) {
    ++indeg[e.to];
    out[e.from].push_back(e.to);
  }
  for (std::size_t c = 0; c < k; ++c)
    if (indeg[c] == 0) d.root_components.push_back(c);
  std::vector<std::size_t> ready = d.root_components;
  std::reverse(ready.begin(), ready.end());
  while (!ready.empty()) {
    const auto c = ready.back();
    ready.pop_back();
    d.topo_order.push_back(c);
    for (auto t : out[c]) {
      if (--indeg[t] == 0) ready.push_back(t);
    }
  }

  if (k == 1) {
    d.connectivity = Connectivity::StronglyConnected;
  } else if (d.root_components.size() == 1) {
    d.connectivity = Connectivity::QuasiStronglyConnected;
  } else if (weak_components(g).size() == 1) {
    d.connectivity = Connectivity::WeaklyConnected;
  } else {
    d.connectivity = Connectivity::Disconnected;
  }
  return d;
}

}  // namespace selfsync
