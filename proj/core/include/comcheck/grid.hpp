#pragma once

// Spatial discretization and the one-dimensional problem specification.
//
// Units: hbar = m = 1 internally. Trapped problems use omega_0 = 1, so lengths
// are in units of the oscillator length and g is the dimensionless coupling
// g m lambda_0 / hbar^2. Untrapped problems use the soliton unit length l = 1.

#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace comcheck {

using cplx = std::complex<double>;

/// Complex-valued samples of a function on a Grid.
using ComplexField = Eigen::VectorXcd;

/// Real-valued samples of a function on a Grid.
using RealField = Eigen::VectorXd;

/// Equidistant grid x_i = center - L/2 + i L/(n-1), i = 0..n-1, with
/// hard-wall boundaries: every function vanishes outside [x_0, x_{n-1}].
class Grid {
 public:
  static constexpr int kMinPoints = 5;

  Grid(double length, int n_points, double center = 0.0);

  int size() const noexcept { return n_points_; }
  double length() const noexcept { return length_; }
  double center() const noexcept { return center_; }
  double spacing() const noexcept { return spacing_; }
  double x(int i) const noexcept { return center_ - 0.5 * length_ + i * spacing_; }
  double left() const noexcept { return x(0); }
  double right() const noexcept { return x(n_points_ - 1); }

  RealField points() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double length_;
  int n_points_;
  double center_;
  double spacing_;
};

/// Throws std::invalid_argument for n_points < 5 or length <= 0.
Grid make_grid(double length, int n_points, double center = 0.0);

/// Fourth-order five-point Laplacian with zero values outside the box.
ComplexField laplacian5(const ComplexField& f, const Grid& grid);

/// Column-wise five-point Laplacian of a set of fields stored as columns.
void laplacian5_columns(const Eigen::MatrixXcd& in, const Grid& grid, Eigen::MatrixXcd& out);

/// Rectangle-rule inner product <f|g> = sum_i conj(f_i) g_i dx.
cplx quadrature(const ComplexField& f, const ComplexField& g, const Grid& grid);

/// Rectangle-rule integral of a real field.
double integrate(const RealField& f, const Grid& grid);

/// Piecewise-constant function of time. The value is `initial` for all t
/// before the first switch time; afterwards the most recent switch applies.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(double constant) : initial_(constant) {}
  Schedule(double initial, std::vector<std::pair<double, double>> switches);

  double at(double t) const noexcept;
  double initial() const noexcept { return initial_; }
  const std::vector<std::pair<double, double>>& switches() const noexcept { return switches_; }
  bool is_constant() const noexcept { return switches_.empty(); }

  /// omega(t) = before for t < 0 and after for t >= 0.
  static Schedule step_at_zero(double before, double after);

 private:
  double initial_ = 0.0;
  std::vector<std::pair<double, double>> switches_;
};

enum class UnitSystem {
  kTrapped,    ///< lengths in lambda_0, energies in hbar omega_0
  kUntrapped,  ///< lengths in l, times in m l^2 / hbar
};

std::string to_string(UnitSystem units);

/// Hamiltonian of N bosons with a harmonic trap and contact interactions:
/// h = -1/(2m) d^2/dx^2 + m omega(t)^2 x^2 / 2, pair interaction g(t) delta(x - y).
struct HamiltonianSpec {
  double mass = 1.0;
  Schedule omega;
  Schedule coupling;
  UnitSystem units = UnitSystem::kTrapped;

  /// Time used when a caller wants the pre-quench (t -> -infinity) parameters.
  static constexpr double kBeforeStart = -std::numeric_limits<double>::infinity();

  double omega_at(double t) const noexcept { return omega.at(t); }
  double coupling_at(double t) const noexcept { return coupling.at(t); }

  /// Throws std::invalid_argument if mass <= 0 or any omega value is negative.
  void validate() const;

  /// Static trap omega and coupling g.
  static HamiltonianSpec constant(double omega, double g, UnitSystem units = UnitSystem::kTrapped);
  /// Ground state in a trap of frequency omega0, released to omega = 0 at t = 0.
  static HamiltonianSpec trap_release(double omega0, double g);
};

}  // namespace comcheck
