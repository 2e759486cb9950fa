#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "comcheck/cli/artifacts.hpp"
#include "comcheck/cli/config.hpp"
#include "comcheck/diagnostics.hpp"
#include "comcheck/mctdhb.hpp"

namespace comcheck::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitSchema = 2,
  kExitPhysicsAbort = 3,
  kExitDiagnosticFailure = 4,
};

/// Configuration-count cap: COMCHECK_MAX_BASIS if set, else the library default.
std::size_t max_basis();

std::string code_version();

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path output_dir;
  json summary;
  std::optional<MctdhbState> initial;  ///< state at t = 0
  std::optional<GroundStateResult> ground;
  std::optional<TimeSeries> series;
  std::optional<TimeSeries> twin;
  std::vector<DiagnosticReport> reports;
  std::string abort_reason;
};

/// Executes one configuration and writes its artifacts. Physics aborts are
/// reported through exit_code (state dumped to abort_state.json); schema
/// problems throw ConfigError.
RunOutcome run_config(const RunConfig& config, std::ostream& log);

/// `comcheck run`: load, run, map exceptions to exit codes.
int run_command(const std::filesystem::path& config_path, std::ostream& log);

/// `comcheck compare`: COM convergence test between two artifact sets (or
/// time-series CSV files). Writes the report to `report_path`.
int compare_command(const std::filesystem::path& a, const std::filesystem::path& b, double tol,
                    const std::filesystem::path& report_path, std::ostream& log);

/// `comcheck scan`: runs every config matching the glob pattern; returns the
/// largest exit code.
int scan_command(const std::string& pattern, std::ostream& log);

}  // namespace comcheck::cli
