#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avfc/config.hpp"
#include "avfc/simulate.hpp"

namespace avfc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverError = 3;

inline constexpr const char* kCurveHeader = "lambda,C_UU,C_TX,C_JAM,C_BOTH,C_NC,C_GAVC";

struct CurveRow {
  double lambda = 0.0;
  double uu = 0.0;
  double tx = 0.0;
  double jam = 0.0;
  double both = 0.0;
  double nc = 0.0;
  double gavc = 0.0;
};

// One CapacityResult per requested configuration, in config order.
json compute_results(const RunConfig& config);

// Capacities at every grid point (default grid when none is configured).
// Points are evaluated on up to `workers` threads and returned in grid order.
std::vector<CurveRow> curve_rows(const RunConfig& config, unsigned workers);
std::string curve_csv(const std::vector<CurveRow>& rows);
json curve_json(const std::vector<CurveRow>& rows);

// Symmetrizability thresholds for the configured model and powers.
json symcheck(const RunConfig& config);

// Simulator setup for the config's "sim" block; solves for the policies the
// chosen knowledge configuration calls for.
sim::SimConfig make_sim_config(const RunConfig& config);

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out;       // overrides the config's "output"
  std::optional<OutputFormat> format;   // overrides the config's "format"
  unsigned workers = 0;                 // 0: worker_count()
};

// Each command writes its result to the output file, or to `out` when no
// file is configured, and reports failures on `err`. Return value is the
// process exit code: 0 success, 2 config error, 3 solver failure.
int cmd_compute(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_curve(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_symcheck(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);

// Dispatch by subcommand name.
int run_command(std::string_view name, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace avfc
