#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "comcheck/diagnostics.hpp"
#include "comcheck/mctdhb.hpp"

namespace comcheck::cli {

using nlohmann::json;

std::uint32_t crc32(const std::string& bytes);
std::string crc32_hex(const std::string& bytes);

/// 17 significant digits.
std::string format_number(double v);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Output directory assembled in a sibling temporary directory and moved into
/// place by commit(). An uncommitted directory is removed on destruction.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path target);
  ~ArtifactDir();
  ArtifactDir(const ArtifactDir&) = delete;
  ArtifactDir& operator=(const ArtifactDir&) = delete;

  const std::filesystem::path& target() const noexcept { return target_; }

  /// Writes `name` (relative path) and records its checksum.
  void write(const std::string& name, const std::string& content);
  const std::map<std::string, std::string>& checksums() const noexcept { return checksums_; }

  /// Writes summary.json (adding the checksum table under "files") and moves
  /// the directory into place, replacing any previous one.
  void commit(json summary);

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::map<std::string, std::string> checksums_;
  bool committed_ = false;
};

/// t, energy, sigma_R2, sigma_n2, occ_1..occ_M
std::string timeseries_csv(const TimeSeries& ts);
/// t, frac_1..frac_M (n_k / N)
std::string occupancy_csv(const TimeSeries& ts);
/// t, x, density (long format)
std::string density_csv(const TimeSeries& ts, const Grid& grid);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);
std::string write_csv(const CsvTable& table);

/// TimeSeries (times and sigma_R2 at least) from an artifact directory or a
/// time-series CSV file.
TimeSeries read_timeseries(const std::filesystem::path& path);

json state_to_json(const MctdhbState& state);
MctdhbState state_from_json(const json& j, std::size_t max_configs);
MctdhbState load_state(const std::filesystem::path& path, std::size_t max_configs);

json report_to_json(const DiagnosticReport& r, bool with_detail = false);

/// Verifies every checksum listed in <dir>/summary.json. Returns the names of
/// files that are missing or differ.
std::vector<std::string> verify_artifacts(const std::filesystem::path& dir);

}  // namespace comcheck::cli
