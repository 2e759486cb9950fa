#pragma once

// Two bosons with contact attraction in a harmonic trap (hbar = m = omega_0 = 1):
// Psi(x1, x2) = psi0(R) phi0(r), R = (x1 + x2) / 2, r = x1 - x2, with
//   psi0(R) = (2/pi)^(1/4) exp(-R^2)
//   phi0(r) = A exp(-r^2 / 4) U(-nu/2, 1/2, r^2 / 2)
// and nu the lowest root of nu = (g / sqrt 2) Gamma(1 - nu/2) / Gamma(1/2 - nu/2).
// The energy is nu + 1.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "comcheck/grid.hpp"
#include "comcheck/observables.hpp"

namespace comcheck {

/// nu - (g / sqrt 2) Gamma(1 - nu/2) / Gamma(1/2 - nu/2).
double nu_residual(double nu, double g_tilde);

/// Lowest root nu < 0 for g_tilde < 0, bisected to |residual| < 1e-12.
/// Throws std::invalid_argument for g_tilde >= 0 and std::runtime_error
/// (with the scan trace) if no sign change is found.
double solve_nu(double g_tilde);

struct ExactTwoBoson {
  double g_tilde = 0.0;
  double nu = 0.0;
  double energy = 0.0;
  double normalization = 0.0;  ///< A, fixed by quadrature on the relative grid
  Grid grid{1.0, Grid::kMinPoints};           ///< simulation grid (x1, x2)
  RealField psi0;              ///< COM wave function sampled on `grid`
  Grid relative_grid{1.0, Grid::kMinPoints};  ///< 2n - 1 points, same spacing, centered at 0
  RealField phi0;              ///< relative wave function on relative_grid
  double edge_amplitude = 0.0; ///< max |Psi| on the box boundary / max |Psi|
  bool precision_loss = false; ///< a U evaluation hit the seam check

  /// psi0 at an arbitrary point (analytic).
  double psi0_at(double r_com) const;
  /// phi0 at relative-grid offset i - z, |i - z| <= n - 1.
  double phi0_offset(int offset) const { return phi0[offset + grid.size() - 1]; }
};

/// Edge amplitude above which ground_state rejects the box.
inline constexpr double kExactEdgeLimit = 1e-4;

/// Samples the exact ground state. Throws std::invalid_argument if the box
/// is too small (|Psi| on the boundary above kExactEdgeLimit of its maximum).
ExactTwoBoson ground_state(double g_tilde, const Grid& grid);

/// Psi(x_i, x_z) on the simulation grid, normalized so sum Psi^2 dx^2 = 1.
Eigen::MatrixXd exact_wavefunction(const ExactTwoBoson& exact);

/// Natural occupancies of rho(x, y) = 2 int Psi(x, z) Psi(y, z) dz. Psi is a
/// real symmetric kernel, so the occupancies are 2 dx^2 mu^2 for its
/// eigenvalues mu. Sorted descending, summing to 2. Natural orbitals are
/// returned when `with_orbitals` is set.
OccupancySpectrum exact_spdm(const ExactTwoBoson& exact, bool with_orbitals = false);

/// rho2(x, y) = 2 Psi(x, y)^2.
Eigen::MatrixXd exact_two_body_density(const ExactTwoBoson& exact);

/// rho(x) = 2 int Psi(x, z)^2 dz.
RealField exact_density(const ExactTwoBoson& exact);

/// Variance of x1 - R = r / 2 from the relative wave function.
double exact_relative_variance(const ExactTwoBoson& exact);

/// sigma_R^2(t) = lambda0^2 / (2N) [1 + (t / lambda0^2)^2] after release at t = 0.
double com_spread_variance(double t, int n_particles, double lambda0 = 1.0);

struct BoundState {
  double coupling = 0.0;
  Grid grid{1.0, Grid::kMinPoints};  ///< fine relative grid with r = 0 on a grid point
  RealField phi;              ///< sqrt(|g|/2) exp(-|g| |r| / 2)
  double variance = 0.0;      ///< closed form 2 / g^2
  double quadrature_norm = 0.0;
  double quadrature_variance = 0.0;
};

/// Free-space bound state of the attractive delta interaction (g < 0).
BoundState bound_state(double g);

}  // namespace comcheck
