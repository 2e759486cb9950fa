#pragma once

// Run configuration: flat-sectioned key = value text.
//
//   schema_version = 1
//   [system]       particles, modes, units (trapped | untrapped)
//   [grid]         length, points, center
//   [hamiltonian]  mass, omega, omega_after, coupling, coupling_after
//                  (the *_after values switch on at t = 0)
//   [initial]      kind (relax | product | load), shape (sech | gaussian),
//                  width, file, dtau, energy_tolerance, max_iterations,
//                  relax_modes, allow_untrapped
//   [propagation]  t_final, dt, record_every, record_density, edge_threshold
//   [diagnostics]  com_reference (none | ballistic | twin), com_tolerance,
//                  occupancy_threshold, width_bounds, width_slack,
//                  twin_length, twin_points
//   [output]       directory
//
// Unknown sections or keys are schema errors.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "comcheck/grid.hpp"
#include "comcheck/mctdhb.hpp"

namespace comcheck::cli {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitialKind { kRelax, kProduct, kLoad };
enum class ComReference { kNone, kBallistic, kTwin };

struct RunConfig {
  std::string source;  ///< config text as read (hashed into the summary)
  std::string origin;  ///< file path or embedded case name

  int particles = 0;
  int modes = 0;
  UnitSystem units = UnitSystem::kTrapped;

  double length = 0.0;
  int points = 0;
  double center = 0.0;

  double mass = 1.0;
  double omega = 0.0;
  std::optional<double> omega_after;
  double coupling = 0.0;
  std::optional<double> coupling_after;

  InitialKind initial = InitialKind::kRelax;
  ShapeKind shape = ShapeKind::kGaussian;
  double width = 1.0;
  std::string load_file;
  RelaxOptions relax;
  int relax_modes = 0;  ///< 0: relax with `modes`; else relax then pad

  double t_final = 0.0;  ///< 0: no propagation
  double dt = 1e-3;
  int record_every = 10;
  bool record_density = false;
  double edge_threshold = 1e-6;

  ComReference com_reference = ComReference::kNone;
  double com_tolerance = 0.05;
  double occupancy_threshold = 1e-3;
  bool width_bounds = false;
  double width_slack = 0.05;
  double twin_length = 0.0;  ///< 0: same as grid
  int twin_points = 0;

  std::filesystem::path output_dir;

  Grid grid() const { return Grid(length, points, center); }
  HamiltonianSpec hamiltonian() const;
};

/// Parses and validates. `origin` names the source in error messages and
/// provides the default output directory (its stem). Relative load/output
/// paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::string& origin,
                       const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

/// Renders a configuration back to text (parse_config round-trips it).
std::string render_config(const RunConfig& config);

std::string to_string(InitialKind kind);
std::string to_string(ComReference ref);
std::string to_string(ShapeKind shape);

}  // namespace comcheck::cli
