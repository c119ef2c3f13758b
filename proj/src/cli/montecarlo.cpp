#include "selfsync/cli/montecarlo.hpp"

#include "selfsync/dde_sim.hpp"
#include "selfsync/error.hpp"
#include "selfsync/netgen.hpp"
#include "selfsync/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

namespace selfsync::cli {

namespace {

using io::Json;

const char* const kCaseNames[] = {"ml",          "no_delay",          "delayed",          "two_step",
                                  "noisy_no_delay", "noisy_delayed", "noisy_two_step"};
constexpr std::size_t kCaseCount = 7;

double standard_normal(CounterRng& rng) {
  const double u1 = rng.uniform(), u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// est(k, i): state increment of node i over the recording interval ending at
// sample k; sample 0 uses the instantaneous derivative.
Eigen::MatrixXd increment_estimates(const Trajectory& t) {
  Eigen::MatrixXd est(t.states.rows(), t.states.cols());
  est.row(0) = t.derivatives.row(0);
  for (Eigen::Index k = 1; k < est.rows(); ++k) {
    est.row(k) = (t.states.row(k) - t.states.row(k - 1)) / (t.times(k) - t.times(k - 1));
  }
  return est;
}

struct TrialOutput {
  std::vector<Eigen::VectorXd> curves;  // one node-averaged curve per case
};

TrialOutput run_trial(const MonteCarloConfig& cfg, std::size_t trial) {
  const std::uint64_t trial_seed = CounterRng::substream(cfg.seed, 0x7472, trial)();
  const auto n = static_cast<Eigen::Index>(cfg.n);

  NodeGeometry geom = place_nodes(cfg.n, cfg.side, trial_seed);
  const SensorDigraph graph = channel_rayleigh(geom, trial_seed);
  geom.speed = speed_for_max_delay(geom, static_cast<double>(cfg.tau_steps) * cfg.t_step);
  const DelayMatrix delays = delays_from_geometry(geom);
  const DelayMatrix no_delays = DelayMatrix::zeros(cfg.n);

  const double sigma_w2 = cfg.xi * cfg.xi / std::pow(10.0, cfg.snr_db / 10.0);
  auto obs = CounterRng::substream(trial_seed, 0x6f6273);
  Eigen::VectorXd amp(n), g(n), c(n);
  std::vector<LinearObsModel> models;
  for (Eigen::Index i = 0; i < n; ++i) {
    amp(i) = cfg.amp_low + (cfg.amp_high - cfg.amp_low) * obs.uniform();
    const double y = amp(i) * cfg.xi + std::sqrt(sigma_w2) * standard_normal(obs);
    g(i) = y / amp(i);
    c(i) = amp(i) * amp(i) / sigma_w2;
    models.push_back({Eigen::MatrixXd::Constant(1, 1, amp(i)), Eigen::MatrixXd::Constant(1, 1, sigma_w2),
                      Eigen::VectorXd::Constant(1, y)});
  }
  const double ml = centralized_blue(models)(0);

  SimConfig sim;
  sim.t_step = cfg.t_step;
  sim.k_gain = cfg.k_gain;
  sim.c_weights = c;
  sim.horizon = cfg.horizon;
  sim.record_every = cfg.record_every;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double sigma_v = cfg.coupling_noise_std * std::abs(cfg.xi);

  auto run = [&](const DelayMatrix& d, const Eigen::VectorXd& forcing, std::uint64_t stream) {
    SimConfig s = sim;
    if (stream > 0) {
      s.noise_std = sigma_v;
      s.rng_seed = CounterRng::substream(trial_seed, 0x6e7a, stream)();
    }
    return increment_estimates(simulate(graph, d, s, forcing));
  };
  auto node_mean = [](const Eigen::MatrixXd& est) -> Eigen::VectorXd { return est.rowwise().mean(); };
  auto ratio_mean = [](const Eigen::MatrixXd& num, const Eigen::MatrixXd& den) -> Eigen::VectorXd {
    return num.cwiseQuotient(den).rowwise().mean();
  };

  TrialOutput out;
  const auto nd = run(no_delays, g, 0);
  const auto dl = run(delays, g, 0);
  const auto one = run(delays, ones, 0);
  out.curves.push_back(Eigen::VectorXd::Constant(nd.rows(), ml));
  out.curves.push_back(node_mean(nd));
  out.curves.push_back(node_mean(dl));
  out.curves.push_back(ratio_mean(dl, one));
  if (cfg.noisy) {
    const auto nnd = run(no_delays, g, 1);
    const auto ndl = run(delays, g, 2);
    const auto none = run(delays, ones, 3);
    out.curves.push_back(node_mean(nnd));
    out.curves.push_back(node_mean(ndl));
    out.curves.push_back(ratio_mean(ndl, none));
  }
  return out;
}

}  // namespace

MonteCarloConfig parse_montecarlo_config(const std::string& text) {
  const Json doc = io::parse_document(text);
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", 1);
  MonteCarloConfig c;
  auto line = [&](const std::string& key) {
    const auto pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  };
  auto number = [&](const char* key, double& out, bool positive) {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>()) || (positive && !(v.get<double>() > 0.0)) ||
        v.get<double>() < 0.0) {
      throw ConfigError(std::string("'") + key + "' must be a " + (positive ? "positive" : "non-negative") + " number",
                        line(key));
    }
    out = v.get<double>();
  };
  auto integer = [&](const char* key, auto& out, long long min) {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < min) {
      throw ConfigError(std::string("'") + key + "' must be an integer >= " + std::to_string(min), line(key));
    }
    out = v.get<std::remove_reference_t<decltype(out)>>();
  };
  integer("seed", c.seed, 0);
  integer("n", c.n, 1);
  integer("trials", c.trials, 1);
  if (doc.contains("xi")) {
    if (!doc.at("xi").is_number()) throw ConfigError("'xi' must be a number", line("xi"));
    c.xi = doc.at("xi").get<double>();
  }
  if (doc.contains("snr_db")) {
    if (!doc.at("snr_db").is_number()) throw ConfigError("'snr_db' must be a number", line("snr_db"));
    c.snr_db = doc.at("snr_db").get<double>();
  }
  if (doc.contains("amp_range")) {
    const auto& v = doc.at("amp_range");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number() || !(v[0].get<double>() > 0.0) ||
        !(v[0].get<double>() <= v[1].get<double>())) {
      throw ConfigError("'amp_range' must be [lo, hi] with 0 < lo <= hi", line("amp_range"));
    }
    c.amp_low = v[0].get<double>();
    c.amp_high = v[1].get<double>();
  }
  number("D", c.side, true);
  number("T_s", c.t_step, true);
  number("K", c.k_gain, true);
  integer("tau_steps", c.tau_steps, 0);
  integer("horizon", c.horizon, 1);
  integer("record_every", c.record_every, 1);
  number("coupling_noise_std", c.coupling_noise_std, false);
  number("final_fraction", c.final_fraction, true);
  if (c.final_fraction > 1.0) throw ConfigError("'final_fraction' must not exceed 1", line("final_fraction"));
  integer("threads", c.threads, 0);
  if (doc.contains("noisy")) {
    if (!doc.at("noisy").is_boolean()) throw ConfigError("'noisy' must be a boolean", line("noisy"));
    c.noisy = doc.at("noisy").get<bool>();
  }
  return c;
}

const CaseCurve& MonteCarloResult::find(const std::string& name) const {
  for (const auto& c : cases)
    if (c.name == name) return c;
  throw ValidationError("no Monte-Carlo case named '" + name + "'");
}

double MonteCarloResult::bias_vs_ml(const std::string& name) const {
  return find(name).final_mean - find("ml").final_mean;
}

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg) {
  if (cfg.trials == 0) throw ValidationError("trials must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  std::vector<TrialOutput> outputs(cfg.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < cfg.trials; t = next++) {
      try {
        outputs[t] = run_trial(cfg, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.trials;
      }
    }
  };
  std::size_t workers = cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.trials);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  MonteCarloResult r;
  r.config = cfg;
  const auto samples = outputs.front().curves.front().size();
  r.iterations.resize(samples);
  r.times.resize(samples);
  for (Eigen::Index k = 0; k < samples; ++k) {
    r.iterations(k) = static_cast<double>(k) * static_cast<double>(cfg.record_every);
    r.times(k) = r.iterations(k) * cfg.t_step;
  }
  const auto tail = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(cfg.final_fraction * static_cast<double>(samples))));
  const auto trials = static_cast<Eigen::Index>(cfg.trials);
  const std::size_t cases = cfg.noisy ? kCaseCount : 4;
  for (std::size_t ci = 0; ci < cases; ++ci) {
    Eigen::MatrixXd m(trials, samples);
    for (Eigen::Index t = 0; t < trials; ++t) m.row(t) = outputs[static_cast<std::size_t>(t)].curves[ci].transpose();
    CaseCurve cc;
    cc.name = kCaseNames[ci];
    cc.mean = m.colwise().mean().transpose();
    cc.stddev = Eigen::VectorXd::Zero(samples);
    if (trials > 1) {
      cc.stddev = ((m.rowwise() - cc.mean.transpose()).array().square().colwise().sum() / static_cast<double>(trials - 1))
                      .sqrt()
                      .transpose();
    }
    cc.final_per_trial = m.rightCols(tail).rowwise().mean();
    cc.final_mean = cc.final_per_trial.mean();
    if (trials > 1) {
      cc.final_variance = (cc.final_per_trial.array() - cc.final_mean).square().sum() / static_cast<double>(trials - 1);
    }
    cc.standard_error = std::sqrt(cc.final_variance / static_cast<double>(trials));
    r.cases.push_back(std::move(cc));
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_curves_csv(std::ostream& os, const MonteCarloResult& r) {
  os << "iteration,t";
  for (const auto& c : r.cases) os << ',' << c.name << "_mean," << c.name << "_std";
  os << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index k = 0; k < r.times.size(); ++k) {
    os << static_cast<long long>(r.iterations(k)) << ',' << r.times(k);
    for (const auto& c : r.cases) os << ',' << c.mean(k) << ',' << c.stddev(k);
    os << '\n';
  }
}

io::Json montecarlo_summary(const MonteCarloResult& r) {
  const auto& cfg = r.config;
  Json cases = Json::object();
  for (const auto& c : r.cases) {
    cases[c.name] = Json{{"final_mean", c.final_mean},
                         {"final_variance", c.final_variance},
                         {"standard_error", c.standard_error},
                         {"bias_vs_ml", r.bias_vs_ml(c.name)}};
  }
  return Json{{"schema", "selfsync.montecarlo/1"},
              {"seed", cfg.seed},
              {"n", cfg.n},
              {"trials", cfg.trials},
              {"xi", cfg.xi},
              {"snr_db", cfg.snr_db},
              {"K", cfg.k_gain},
              {"T_s", cfg.t_step},
              {"tau_max", static_cast<double>(cfg.tau_steps) * cfg.t_step},
              {"horizon", cfg.horizon},
              {"coupling_noise_std", cfg.coupling_noise_std * std::abs(cfg.xi)},
              {"cases", std::move(cases)}};
}

}  // namespace selfsync::cli
