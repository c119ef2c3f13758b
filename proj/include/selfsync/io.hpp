#pragma once

#include "selfsync/dde_sim.hpp"
#include "selfsync/delay_matrix.hpp"
#include "selfsync/digraph.hpp"
#include "selfsync/netgen.hpp"
#include "selfsync/protocols.hpp"
#include "selfsync/spectral.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace selfsync::io {

using Json = nlohmann::ordered_json;

// Parses a JSON document; syntax errors become ConfigError with a line number.
Json parse_document(const std::string& text);
Json read_document(const std::string& path);
void write_document(const std::string& path, const Json& doc);

// {"n": N, "edges": [[i, j, a_ij], ...]}, 0-based, row-major.
Json digraph_to_json(const SensorDigraph& g);
SensorDigraph digraph_from_json(const Json& doc);

// {"n": N, "tau_max": t, "tau": [[...], ...]}.
Json delays_to_json(const DelayMatrix& d);
DelayMatrix delays_from_json(const Json& doc);

Json geometry_to_json(const NodeGeometry& geom);
// Distances are recomputed from the positions.
NodeGeometry geometry_from_json(const Json& doc);

// Header: t, x_1..x_n, dx_1..dx_n (x_i_c / dx_i_c for vector states).
// Every `downsample`-th recorded row is written.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t downsample = 1);

Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& doc);
Json sync_to_json(const SyncResult& s);
Json rate_to_json(const RateEstimate& r);
Json prediction_to_json(const ConsensusPrediction& p);
Json unbias_to_json(const UnbiasReport& r);
Json scc_to_json(const SccDecomposition& scc);

}  // namespace selfsync::io
