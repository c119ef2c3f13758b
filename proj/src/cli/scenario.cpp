#include "selfsync/cli/scenario.hpp"

#include "selfsync/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace selfsync::cli {

namespace {

using io::Json;

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  Reader(const std::string& text, const Json& doc) : text_(text), doc_(doc) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("'" + key + "' " + what, line_of_key(text_, key));
  }

  bool has(const std::string& key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }
  const Json& at(const std::string& key) const { return doc_.at(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = doc_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) fail(key, "must be a finite number");
    return v.get<double>();
  }

  double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  double non_negative(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (v < 0.0) fail(key, "must be non-negative");
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) const {
    if (!has(key)) return fallback;
    const auto& v = doc_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
      fail(key, "must be an integer >= " + std::to_string(min));
    }
    return v.get<std::uint64_t>();
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     std::initializer_list<const char*> allowed) const {
    if (!has(key)) return fallback;
    const auto& v = doc_.at(key);
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      for (const char* a : allowed)
        if (s == a) return s;
    }
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    fail(key, "must be one of: " + list);
  }

  Eigen::VectorXd vector(const std::string& key) const {
    try {
      return io::vector_from_json(doc_.at(key));
    } catch (const ConfigError&) {
      fail(key, "must be an array of numbers");
    }
  }

 private:
  const std::string& text_;
  const Json& doc_;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json read_file(const std::filesystem::path& p) { return io::read_document(p.string()); }

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
  const Json doc = io::parse_document(text);
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", 1);
  const Reader r(text, doc);
  ScenarioConfig c;

  c.seed = r.count("seed", c.seed);
  c.channel_mode = r.choice("channel_mode", c.channel_mode, {"rayleigh", "pathloss", "reference"});
  if (c.channel_mode == "reference") {
    if (!r.has("topology")) r.fail("channel_mode", "\"reference\" requires a 'topology' key");
    c.topology = r.choice("topology", "", {"sc", "qsc3", "wc2"});
    c.n = 14;
    if (r.has("n") && r.count("n", 0) != 14) r.fail("n", "must be 14 for reference topologies");
  } else {
    if (!r.has("n")) throw ConfigError("missing required key 'n'", 1);
    c.n = r.count("n", 0, 1);
  }
  c.side = r.positive("D", c.side);
  c.t_step = r.positive("T_s", c.t_step);
  c.k_gain = r.positive("K", c.k_gain);
  c.eta = r.positive("eta", c.eta);
  if (r.has("powers")) {
    if (r.at("powers").is_number()) {
      c.powers = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(c.n), r.positive("powers", 1.0));
    } else {
      c.powers = r.vector("powers");
      if (c.powers.size() != static_cast<Eigen::Index>(c.n)) r.fail("powers", "must hold n entries");
      if ((c.powers.array() <= 0.0).any()) r.fail("powers", "entries must be positive");
    }
  }
  c.threshold = r.non_negative("threshold", c.threshold);
  c.delay_mode = r.choice("delay_mode", c.delay_mode, {"zero", "uniform", "max_delay", "propagation"});
  c.tau_max = r.non_negative("tau_max", c.tau_max);
  if (r.has("speed")) c.speed = r.positive("speed", c.speed);
  c.offset = r.non_negative("offset", c.offset);
  if (c.channel_mode == "reference" && (c.delay_mode == "max_delay" || c.delay_mode == "propagation")) {
    r.fail("delay_mode", "must be \"zero\" or \"uniform\" for reference topologies");
  }
  const auto conv = r.choice("rayleigh_convention", "second_moment", {"second_moment", "gaussian_variance"});
  c.convention = conv == "second_moment" ? RayleighConvention::SecondMoment : RayleighConvention::GaussianVariance;

  if (r.has("c_weights")) {
    c.c_weights = r.vector("c_weights");
    if (c.c_weights.size() != static_cast<Eigen::Index>(c.n)) r.fail("c_weights", "must hold n entries");
    if ((c.c_weights.array() <= 0.0).any()) r.fail("c_weights", "entries must be positive");
  }
  if (r.has("g_values")) {
    const auto& v = r.at("g_values");
    if (v.is_object()) {
      if (!v.contains("uniform") || !v.at("uniform").is_array() || v.at("uniform").size() != 2 ||
          !v.at("uniform")[0].is_number() || !v.at("uniform")[1].is_number()) {
        r.fail("g_values", "object form must be {\"uniform\": [lo, hi]}");
      }
      c.g_low = v.at("uniform")[0].get<double>();
      c.g_high = v.at("uniform")[1].get<double>();
      if (!(c.g_low <= c.g_high)) r.fail("g_values", "uniform range must satisfy lo <= hi");
    } else {
      c.g_values = r.vector("g_values");
      if (c.g_values.size() != static_cast<Eigen::Index>(c.n)) r.fail("g_values", "must hold n entries");
    }
  }
  c.horizon = r.count("horizon", c.horizon, 1);
  c.sync_rel_tol = r.positive("sync_rel_tol", c.sync_rel_tol);
  c.window_fraction = r.positive("window_fraction", c.window_fraction);
  if (c.window_fraction > 1.0) r.fail("window_fraction", "must not exceed 1");
  return c;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  Scenario s;
  s.seed = cfg.seed;
  const auto n = static_cast<Eigen::Index>(cfg.n);
  if (cfg.n == 0) throw ValidationError("scenario needs at least one node");

  if (cfg.channel_mode == "reference") {
    s.graph = reference_topology(parse_reference_topology(cfg.topology));
    s.label = "reference:" + cfg.topology;
  } else {
    NodeGeometry geom = place_nodes(cfg.n, cfg.side, cfg.seed);
    geom.path_loss_exponent = cfg.eta;
    if (cfg.powers.size() > 0) geom.powers = cfg.powers;
    if (cfg.channel_mode == "rayleigh") {
      s.graph = channel_rayleigh(geom, cfg.seed, cfg.convention);
    } else {
      Eigen::MatrixXd fading = Eigen::MatrixXd::Ones(n, n);
      fading.diagonal().setZero();
      s.graph = channel_pathloss(geom, fading);
    }
    s.label = cfg.channel_mode;
    s.geometry = std::move(geom);
  }
  if (cfg.threshold > 0.0) s.graph = threshold_prune(s.graph, cfg.threshold);

  if (cfg.delay_mode == "zero") {
    s.delays = DelayMatrix::zeros(cfg.n);
  } else if (cfg.delay_mode == "uniform") {
    s.delays = DelayMatrix::uniform(cfg.n, cfg.tau_max);
  } else {
    auto& geom = *s.geometry;
    if (cfg.delay_mode == "max_delay") {
      geom.speed = speed_for_max_delay(geom, cfg.tau_max);
    } else {
      geom.speed = cfg.speed;
      geom.offsets = Eigen::MatrixXd::Constant(n, n, cfg.offset);
      geom.offsets.diagonal().setZero();
    }
    s.delays = delays_from_geometry(geom);
  }

  s.sim.t_step = cfg.t_step;
  s.sim.k_gain = cfg.k_gain;
  s.sim.c_weights = cfg.c_weights.size() > 0 ? cfg.c_weights : Eigen::VectorXd::Ones(n);
  s.sim.horizon = cfg.horizon;
  s.sim.rng_seed = cfg.seed;
  if (cfg.g_values.size() > 0) {
    s.g_values = cfg.g_values;
  } else {
    s.g_values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto rng = CounterRng::substream(cfg.seed, 0x67, static_cast<std::uint64_t>(i));
      s.g_values(i) = cfg.g_low + (cfg.g_high - cfg.g_low) * rng.uniform();
    }
  }
  s.sync.rel_tol = cfg.sync_rel_tol;
  s.sync.window_fraction = cfg.window_fraction;
  return s;
}

io::Json scenario_to_json(const Scenario& s) {
  Json doc{{"schema", "selfsync.scenario/1"},
           {"seed", s.seed},
           {"label", s.label},
           {"n", s.graph.size()},
           {"T_s", s.sim.t_step},
           {"K", s.sim.k_gain},
           {"horizon", s.sim.horizon},
           {"c_weights", io::vector_to_json(s.sim.c_weights)},
           {"g_values", io::vector_to_json(s.g_values)},
           {"sync_rel_tol", s.sync.rel_tol},
           {"window_fraction", s.sync.window_fraction}};
  Json files{{"digraph", "digraph.json"}, {"delays", "delays.json"}};
  if (s.geometry) files["geometry"] = "geometry.json";
  doc["files"] = std::move(files);
  return doc;
}

void write_scenario(const Scenario& s, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  io::write_document((root / "scenario.json").string(), scenario_to_json(s));
  io::write_document((root / "digraph.json").string(), io::digraph_to_json(s.graph));
  io::write_document((root / "delays.json").string(), io::delays_to_json(s.delays));
  if (s.geometry) io::write_document((root / "geometry.json").string(), io::geometry_to_json(*s.geometry));
}

Scenario read_scenario(const std::string& dir) {
  const std::filesystem::path root(dir);
  const Json doc = read_file(root / "scenario.json");
  if (!doc.is_object() || doc.value("schema", "") != "selfsync.scenario/1") {
    throw ConfigError("scenario.json: unsupported or missing schema");
  }
  Scenario s;
  try {
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.label = doc.value("label", "");
    const auto& files = doc.at("files");
    s.graph = io::digraph_from_json(read_file(root / files.at("digraph").get<std::string>()));
    s.delays = io::delays_from_json(read_file(root / files.at("delays").get<std::string>()));
    if (files.contains("geometry")) s.geometry = io::geometry_from_json(read_file(root / files.at("geometry").get<std::string>()));
    s.sim.t_step = doc.at("T_s").get<double>();
    s.sim.k_gain = doc.at("K").get<double>();
    s.sim.horizon = doc.at("horizon").get<std::size_t>();
    s.sim.c_weights = io::vector_from_json(doc.at("c_weights"));
    s.sim.rng_seed = s.seed;
    s.g_values = io::vector_from_json(doc.at("g_values"));
    s.sync.rel_tol = doc.at("sync_rel_tol").get<double>();
    s.sync.window_fraction = doc.at("window_fraction").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario.json: ") + e.what());
  }
  const auto n = s.graph.size();
  if (s.delays.size() != n || static_cast<std::size_t>(s.g_values.size()) != n ||
      static_cast<std::size_t>(s.sim.c_weights.size()) != n) {
    throw ConfigError("scenario files disagree on the node count");
  }
  return s;
}

std::string scenario_digest(const Scenario& s) {
  std::uint64_t h = fnv1a(scenario_to_json(s).dump());
  h = fnv1a(io::digraph_to_json(s.graph).dump(), h);
  h = fnv1a(io::delays_to_json(s.delays).dump(), h);
  return hex64(h);
}

}  // namespace selfsync::cli
