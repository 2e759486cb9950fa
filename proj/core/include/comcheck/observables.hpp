#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "comcheck/grid.hpp"
#include "comcheck/mctdhb.hpp"

namespace comcheck {

/// Natural occupancies n_1 >= ... >= n_M (eigenvalues of rho1) and the
/// natural orbitals sampled on the grid (columns, phases pinned).
struct OccupancySpectrum {
  int particles = 0;
  std::vector<double> occupations;
  Eigen::MatrixXcd natural_orbitals;

  std::vector<double> fractions() const;
  double sum() const;
};

/// rho(x) = sum_kq rho1_kq conj(phi_k(x)) phi_q(x); integrates to N.
RealField density(const MctdhbState& state);

OccupancySpectrum natural_occupancies(const MctdhbState& state);

/// Eigen-decomposition of a Hermitian rho1 (descending, ties kept in
/// eigensolver order) with natural orbitals formed from `orbitals`.
OccupancySpectrum occupancies_from_rho1(const ModeMatrix& rho1, const Eigen::MatrixXcd& orbitals, int particles);

/// rho2(x, y) = sum rho2_ksql conj(phi_k(x) phi_s(y)) phi_q(x) phi_l(y) on the
/// full grid. Throws ResourceLimitError if n_points^2 exceeds max_entries.
Eigen::MatrixXd two_body_density(const MctdhbState& state, std::size_t max_entries = 16'000'000);

/// Center-of-mass variance <R^2> - <R>^2 from the reduced density matrices,
/// without materializing rho2(x, y).
double com_variance(const MctdhbState& state);
double com_variance(const ReducedDensities& rd, const Eigen::MatrixXcd& orbitals, const Grid& grid, int particles);

/// Center-of-mass variance from an explicit two-body density on the grid:
/// int [x^2 + (N-1) x y] / (N^2 (N-1)) rho2(x,y) dx dy minus the squared mean
/// of R (the mean uses the marginal of rho2, which is (N-1) rho(x)).
double com_variance_from_two_body(const Eigen::MatrixXd& rho2, const Grid& grid, int particles);

/// sigma_n^2 = N^-1 int x^2 rho - (N^-1 int x rho)^2.
double density_variance(const MctdhbState& state);
double density_variance(const RealField& rho, const Grid& grid);

/// Variance of the mean-field bright-soliton density:
/// pi^2 / (3 g^2 (N-1)^2) with hbar = m = 1. Rejects g == 0 and N < 2.
double soliton_variance(int particles, double g);

/// E = sum h rho1 + 1/2 sum W rho2 with the Hamiltonian at time t.
double total_energy(const MctdhbState& state, const HamiltonianSpec& spec, double t);

struct Measurement {
  double energy = 0.0;
  double sigma_r2 = 0.0;
  double sigma_n2 = 0.0;
  std::vector<double> occupations;
};

/// All recorded observables in one pass over the reduced densities.
Measurement measure(const MctdhbState& state, const HamiltonianSpec& spec, double t);

}  // namespace comcheck
