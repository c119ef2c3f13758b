#pragma once

#include "selfsync/cli/scenario.hpp"
#include "selfsync/io.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace selfsync::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,      // runtime failure (numerical, topology, I/O)
  kExitBadInput = 2,   // malformed config, scenario or command line
  kExitNoSync = 3,     // detect_sync found no synchronized state within the horizon
};

struct RunOptions {
  std::string mode = "simulate";  // simulate | predict | unbias2 | gamma_protocol
  std::optional<std::size_t> horizon;
  std::optional<double> tol;
  std::optional<std::size_t> window;
  std::optional<std::uint64_t> seed;  // overrides the coupling-noise seed
  std::optional<double> noise_std;
  std::string out_dir;               // defaults to the scenario directory
  std::size_t downsample = 1;
  bool simulate_passes = false;      // protocol modes: simulate every pass
};

// Each command writes its files, prints a short summary to `out` and returns
// an ExitCode. Errors propagate as exceptions; run_cli maps them to codes.
int cmd_gen(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out);
int cmd_run(const std::string& scenario_dir, const RunOptions& opts, std::ostream& out);
int cmd_inspect(const std::string& scenario_dir, std::ostream& out);
int cmd_montecarlo(const std::string& config_path, std::optional<std::size_t> trials, const std::string& out_dir,
                   std::ostream& out);

// Connectivity class, gamma and rate bounds of a scenario.
io::Json inspect_report(const Scenario& s);

// Full command-line entry point: gen | run | montecarlo | inspect.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selfsync::cli
