#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "comcheck/cli/artifacts.hpp"

namespace comcheck::cli {

/// One reference comparison. `pass` is decided by the case; value/reference/
/// tolerance are informational when the check is qualitative (tolerance NaN).
struct CaseCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct CaseResult {
  std::string name;
  std::vector<CaseCheck> checks;
  std::filesystem::path output_dir;
  json data;  ///< case-specific numbers (also written to summary.json)

  bool passed() const;
  const CaseCheck* find(const std::string& check) const;
};

struct ReproduceOptions {
  bool extended = false;  ///< enables the hours-long runs (fig1 M=3, fig2 M=9, fig4 M=3 weak traps)
  std::filesystem::path output_root = "comcheck-out/reproduce";
};

const std::vector<std::string>& case_names();

/// Runs the embedded configuration(s) for `name` and writes plot-ready CSV,
/// checks.csv and summary.json under output_root/name. Throws
/// std::invalid_argument for unknown names and ResourceLimitError when a run
/// needs more configurations than max_basis().
CaseResult reproduce_case(const std::string& name, const ReproduceOptions& options, std::ostream& log);

/// `comcheck reproduce`: exit 0 when every check passes, 4 otherwise.
int reproduce_command(const std::string& name, const ReproduceOptions& options, std::ostream& log);

}  // namespace comcheck::cli
