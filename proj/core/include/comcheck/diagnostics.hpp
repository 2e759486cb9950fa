#pragma once

// Convergence diagnostics for many-body simulations of attractive bosons.

#include <string>
#include <vector>

#include "comcheck/mctdhb.hpp"

namespace comcheck {

enum class Verdict { kConverged, kUnconverged, kInconclusive };

std::string to_string(Verdict v);

struct DiagnosticReport {
  std::string test;
  Verdict verdict = Verdict::kInconclusive;
  double metric = 0.0;
  double threshold = 0.0;
  /// Advisory reports never decide the headline verdict of a run.
  bool advisory = false;
  std::string note;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> detail;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultComTolerance = 0.05;
inline constexpr double kDefaultOccupancyThreshold = 1e-3;
inline constexpr double kDefaultWidthSlack = 0.05;

/// metric = max_t |sigma_R^2(a) / sigma_R^2(ref) - 1|; unconverged when above
/// tol. Throws std::invalid_argument if the time stamps differ by more than
/// time_tolerance or the series are empty.
DiagnosticReport com_convergence_test(const TimeSeries& series, const TimeSeries& reference,
                                      double tol = kDefaultComTolerance, double time_tolerance = 1e-9);

/// Reference series holding only sigma_R^2(t) of the ballistic law.
TimeSeries ballistic_reference(const std::vector<double>& times, int n_particles, double lambda0 = 1.0);

/// Exact sigma_R^2(t) of a COM ground state in a trap omega0 after the trap
/// switches to omega_final at t = 0 (breathing law; ballistic for omega_final = 0).
TimeSeries harmonic_com_reference(const std::vector<double>& times, int n_particles, double mass, double omega0,
                                  double omega_final);

/// metric = max_t n_M / N. Passes ("converged by criterion") when below the
/// threshold. Always advisory; inconclusive for M = 1.
DiagnosticReport occupancy_threshold_check(const TimeSeries& series,
                                           double threshold = kDefaultOccupancyThreshold);

/// sigma_R^2 <= sigma_n^2 <= sigma_R^2 + sigma_sol^2 (upper bound approximate),
/// each side relaxed by slack * sigma_R^2. metric is the larger violation in
/// units of sigma_R^2 (<= 0 inside the bounds).
DiagnosticReport width_bounds_check(double sigma_r2, double sigma_n2, double sigma_sol2,
                                    double slack = kDefaultWidthSlack);

struct PowerLawFit {
  double exponent = 0.0;  ///< slope of log(error) against log(M), all valid points
  double prefactor = 0.0;
  int points = 0;
  double restricted_exponent = 0.0;  ///< M >= restrict_min only; NaN if < 2 points
  int restricted_points = 0;
  int restrict_min = 6;
  std::vector<std::string> warnings;
};

/// Log-log least squares of |O_exact - O_M| ~ M^nu. Non-positive errors are
/// dropped with a warning; throws std::invalid_argument if fewer than three
/// points remain or the inputs have different lengths.
PowerLawFit power_law_fit(const std::vector<int>& modes, const std::vector<double>& errors, int restrict_min = 6);

/// sigma_R / sigma_sol for the trapped ground state: sqrt(1 / (2N)) divided by
/// the soliton width at coupling g_tilde (trap units).
double length_ratio(double g_tilde, int n_particles);

}  // namespace comcheck
