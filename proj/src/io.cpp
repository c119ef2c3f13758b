#include "selfsync/io.hpp"

#include "selfsync/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace selfsync::io {

namespace {

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t node_count(const Json& doc) {
  if (!doc.contains("n") || !doc.at("n").is_number_integer() || doc.at("n").get<long long>() < 1) {
    throw ConfigError("field 'n' must be a positive integer");
  }
  return doc.at("n").get<std::size_t>();
}

}  // namespace

Json parse_document(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what(), line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

Json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

void write_document(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

Json digraph_to_json(const SensorDigraph& g) {
  Json edges = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (auto j : g.neighbors(i)) edges.push_back(Json::array({i, j, g.weight(i, j)}));
  return Json{{"n", g.size()}, {"edges", std::move(edges)}};
}

SensorDigraph digraph_from_json(const Json& doc) {
  const auto n = node_count(doc);
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  if (!doc.contains("edges") || !doc.at("edges").is_array()) throw ConfigError("field 'edges' must be an array");
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 3) throw ConfigError("each edge must be [i, j, weight]");
    const auto i = e[0].get<long long>(), j = e[1].get<long long>();
    if (i < 0 || j < 0 || i >= m || j >= m) throw ConfigError("edge index out of range");
    a(i, j) = e[2].get<double>();
  }
  return SensorDigraph(std::move(a));
}

Json delays_to_json(const DelayMatrix& d) {
  return Json{{"n", d.size()}, {"tau_max", d.tau_max()}, {"tau", matrix_to_json(d.tau())}};
}

DelayMatrix delays_from_json(const Json& doc) {
  const auto n = node_count(doc);
  const auto& rows = doc.at("tau");
  if (!rows.is_array() || rows.size() != n) throw ConfigError("field 'tau' must hold n rows");
  Eigen::MatrixXd t(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n) throw ConfigError("delay row " + std::to_string(i) + " must hold n entries");
    for (std::size_t j = 0; j < n; ++j) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return DelayMatrix(std::move(t));
}

Json geometry_to_json(const NodeGeometry& geom) {
  Json speed = std::isfinite(geom.speed) ? Json(geom.speed) : Json(nullptr);
  return Json{{"n", geom.size()},
              {"side", geom.side},
              {"path_loss_exponent", geom.path_loss_exponent},
              {"speed", speed},
              {"positions", matrix_to_json(geom.positions)},
              {"powers", vector_to_json(geom.powers)},
              {"offsets", matrix_to_json(geom.offsets)}};
}

NodeGeometry geometry_from_json(const Json& doc) {
  const auto n = node_count(doc);
  const auto m = static_cast<Eigen::Index>(n);
  NodeGeometry g;
  try {
    g.side = doc.at("side").get<double>();
    g.path_loss_exponent = doc.at("path_loss_exponent").get<double>();
    g.speed = doc.at("speed").is_null() ? std::numeric_limits<double>::infinity() : doc.at("speed").get<double>();
    g.powers = vector_from_json(doc.at("powers"));
    const auto& pos = doc.at("positions");
    const auto& off = doc.at("offsets");
    if (!pos.is_array() || pos.size() != n || !off.is_array() || off.size() != n) {
      throw ConfigError("geometry positions and offsets must hold n rows");
    }
    g.positions.resize(m, 2);
    g.offsets.resize(m, m);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (pos[i].size() != 2 || off[i].size() != n) throw ConfigError("geometry row " + std::to_string(i) + " has the wrong length");
      g.positions(ii, 0) = pos[i][0].get<double>();
      g.positions(ii, 1) = pos[i][1].get<double>();
      for (std::size_t j = 0; j < n; ++j) g.offsets(ii, static_cast<Eigen::Index>(j)) = off[i][j].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  if (g.powers.size() != m) throw ConfigError("geometry powers must hold n entries");
  g.distances.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      g.distances(i, j) = g.distances(j, i) = (g.positions.row(i) - g.positions.row(j)).norm();
  return g;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t downsample) {
  if (downsample == 0) downsample = 1;
  auto name = [&](const char* prefix, std::size_t i, std::size_t c) {
    std::string s = prefix + std::to_string(i + 1);
    if (traj.dim > 1) s += "_" + std::to_string(c + 1);
    return s;
  };
  os << "t";
  for (const char* prefix : {"x_", "dx_"})
    for (std::size_t i = 0; i < traj.nodes; ++i)
      for (std::size_t c = 0; c < traj.dim; ++c) os << ',' << name(prefix, i, c);
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < traj.samples(); k += downsample) {
    os << traj.times(static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c) os << ',' << traj.states(static_cast<Eigen::Index>(k), c);
    for (Eigen::Index c = 0; c < traj.derivatives.cols(); ++c) os << ',' << traj.derivatives(static_cast<Eigen::Index>(k), c);
    os << '\n';
  }
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& doc) {
  if (!doc.is_array()) throw ConfigError("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) throw ConfigError("expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
  }
  return v;
}

Json sync_to_json(const SyncResult& s) {
  Json clusters = Json::array();
  for (const auto& c : s.clusters) {
    clusters.push_back(Json{{"nodes", c.nodes},
                            {"value", c.value.size() == 1 ? Json(c.value(0)) : vector_to_json(c.value)},
                            {"spread", c.spread},
                            {"detection_time", c.detection_time}});
  }
  return Json{{"global", s.global},
              {"tol", s.tol},
              {"window", s.window},
              {"clusters", std::move(clusters)},
              {"unclustered", s.unclustered}};
}

Json rate_to_json(const RateEstimate& r) {
  Json value = std::isfinite(r.value) ? Json(r.value) : Json(nullptr);
  Json out{{"method", to_string(r.method)}, {"value", value}};
  if (r.method == RateMethod::EmpiricalFit) {
    out["residual"] = r.residual;
    out["degenerate"] = r.degenerate;
    out["fit_samples"] = r.fit_samples;
  }
  return out;
}

Json prediction_to_json(const ConsensusPrediction& p) {
  Json clusters = Json::array();
  for (const auto& c : p.per_cluster) {
    clusters.push_back(Json{{"root_nodes", c.root_nodes},
                            {"value", c.omega.size() == 1 ? Json(c.omega(0)) : vector_to_json(c.omega)},
                            {"numerator", c.terms.numerator},
                            {"gamma_c", c.terms.gamma_c},
                            {"delay_term", c.terms.delay_term},
                            {"gamma", vector_to_json(c.gamma.gamma)}});
  }
  Json out{{"global", p.global}};
  out["omega_star"] = p.global ? (p.omega_star.size() == 1 ? Json(p.omega_star(0)) : vector_to_json(p.omega_star))
                               : Json(nullptr);
  out["clusters"] = std::move(clusters);
  out["unpredicted"] = p.unpredicted;
  return out;
}

Json unbias_to_json(const UnbiasReport& r) {
  Json out{{"omega_y", r.omega_y}, {"omega_one", r.omega_one}, {"ratio", r.ratio}, {"passes", r.passes}};
  if (r.gamma_tilde.size() > 0) {
    out["gamma_tilde"] = vector_to_json(r.gamma_tilde);
    out["compensated_c"] = vector_to_json(r.compensated_c);
  }
  return out;
}

Json scc_to_json(const SccDecomposition& scc) {
  Json edges = Json::array();
  for (const auto& e : scc.condensation_edges) edges.push_back(Json::array({e.from, e.to}));
  return Json{{"connectivity", to_string(scc.connectivity)},
              {"components", scc.components},
              {"condensation_edges", std::move(edges)},
              {"topo_order", scc.topo_order},
              {"root_components", scc.root_components}};
}

}  // namespace selfsync::io
