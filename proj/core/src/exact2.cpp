#include "comcheck/exact2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "comcheck/special_functions.hpp"

namespace comcheck {

namespace {

constexpr double kResidualTolerance = 1e-12;

}  // namespace

double nu_residual(double nu, double g_tilde) {
  // Both Gamma arguments are positive for nu < 1; lgamma avoids overflow at large |nu|.
  const double a = 1.0 - 0.5 * nu;
  const double b = 0.5 - 0.5 * nu;
  double ratio = 0.0;
  if (a > 0.0 && b > 0.0) {
    ratio = std::exp(std::lgamma(a) - std::lgamma(b));
  } else {
    ratio = gamma_fn(a) * reciprocal_gamma(b);
  }
  return nu - g_tilde / std::numbers::sqrt2 * ratio;
}

double solve_nu(double g_tilde) {
  if (!(g_tilde < 0.0) || !std::isfinite(g_tilde)) throw std::invalid_argument("solve_nu: requires g < 0");
  const double nu_min = -2.0 * std::ceil(g_tilde * g_tilde / 4.0) - 2.0;
  std::ostringstream trace;
  // Scan unit-width intervals upward from nu_min; the first sign change is
  // the lowest (ground) branch.
  double lo = nu_min;
  double f_lo = nu_residual(lo, g_tilde);
  trace << "f(" << lo << ")=" << f_lo;
  for (double hi = lo + 1.0; lo < 0.0; lo = hi, hi = std::min(hi + 1.0, 0.0)) {
    const double f_hi = nu_residual(hi, g_tilde);
    trace << " f(" << hi << ")=" << f_hi;
    if (std::signbit(f_lo) != std::signbit(f_hi) || f_hi == 0.0) {
      double a = lo;
      double b = hi;
      double fa = f_lo;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = nu_residual(mid, g_tilde);
        if (std::abs(fm) < kResidualTolerance || b - a < 1e-15) return mid;
        if (std::signbit(fm) == std::signbit(fa)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    f_lo = f_hi;
    if (hi >= 0.0) break;
  }
  throw std::runtime_error("solve_nu: no sign change in (" + std::to_string(nu_min) + ", 0); scan: " + trace.str());
}

double ExactTwoBoson::psi0_at(double r_com) const {
  return std::pow(2.0 / std::numbers::pi, 0.25) * std::exp(-r_com * r_com);
}

ExactTwoBoson ground_state(double g_tilde, const Grid& grid) {
  ExactTwoBoson ex;
  ex.g_tilde = g_tilde;
  ex.nu = solve_nu(g_tilde);
  ex.energy = ex.nu + 1.0;
  ex.grid = grid;
  const int n = grid.size();
  const double dx = grid.spacing();
  ex.relative_grid = Grid(2.0 * (n - 1) * dx, 2 * n - 1, 0.0);

  ex.psi0.resize(n);
  for (int i = 0; i < n; ++i) ex.psi0[i] = ex.psi0_at(grid.x(i));

  const double a = -0.5 * ex.nu;
  ex.phi0.resize(2 * n - 1);
  for (int j = 0; j < n; ++j) {
    const double r = j * dx;
    const KummerResult u = kummer_u_half_checked(a, 0.5 * r * r);
    ex.precision_loss = ex.precision_loss || u.precision_loss;
    const double v = std::exp(-0.25 * r * r) * u.value;
    ex.phi0[n - 1 + j] = v;
    ex.phi0[n - 1 - j] = v;
  }
  ex.normalization = 1.0 / std::sqrt(dx * ex.phi0.squaredNorm());
  ex.phi0 *= ex.normalization;

  // Largest |Psi| on the box boundary (x1 at either wall), relative to the peak.
  double edge = 0.0;
  for (int z = 0; z < n; ++z) {
    const double left = std::abs(ex.psi0_at(0.5 * (grid.x(0) + grid.x(z))) * ex.phi0_offset(-z));
    const double right = std::abs(ex.psi0_at(0.5 * (grid.x(n - 1) + grid.x(z))) * ex.phi0_offset(n - 1 - z));
    edge = std::max({edge, left, right});
  }
  const double peak = ex.psi0_at(0.0) * ex.phi0.cwiseAbs().maxCoeff();
  ex.edge_amplitude = edge / peak;
  if (ex.edge_amplitude > kExactEdgeLimit) {
    std::ostringstream msg;
    msg << "ground_state: box too small for g=" << g_tilde << " (|Psi| at the walls is " << ex.edge_amplitude
        << " of its peak; limit " << kExactEdgeLimit << ")";
    throw std::invalid_argument(msg.str());
  }
  return ex;
}

Eigen::MatrixXd exact_wavefunction(const ExactTwoBoson& exact) {
  const Grid& grid = exact.grid;
  const int n = grid.size();
  Eigen::MatrixXd psi(n, n);
  for (int z = 0; z < n; ++z)
    for (int i = 0; i < n; ++i) psi(i, z) = exact.psi0_at(0.5 * (grid.x(i) + grid.x(z))) * exact.phi0_offset(i - z);
  const double dx = grid.spacing();
  psi /= std::sqrt(psi.squaredNorm() * dx * dx);
  return psi;
}

OccupancySpectrum exact_spdm(const ExactTwoBoson& exact, bool with_orbitals) {
  const Eigen::MatrixXd psi = exact_wavefunction(exact);
  const double dx = exact.grid.spacing();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      psi, with_orbitals ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("exact_spdm: eigensolver did not converge");
  const int n = static_cast<int>(psi.rows());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const Eigen::VectorXd occ = 2.0 * dx * dx * eig.eigenvalues().cwiseAbs2();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return occ[a] > occ[b]; });
  OccupancySpectrum spec;
  spec.particles = 2;
  spec.occupations.resize(n);
  for (int k = 0; k < n; ++k) spec.occupations[k] = occ[order[k]];
  if (with_orbitals) {
    spec.natural_orbitals.resize(n, n);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXcd v = eig.eigenvectors().col(order[k]).cast<cplx>() / std::sqrt(dx);
      Eigen::Index imax = 0;
      v.cwiseAbs2().maxCoeff(&imax);
      if (v[imax].real() < 0.0) v = -v;
      spec.natural_orbitals.col(k) = v;
    }
  }
  return spec;
}

Eigen::MatrixXd exact_two_body_density(const ExactTwoBoson& exact) {
  return 2.0 * exact_wavefunction(exact).cwiseAbs2();
}

RealField exact_density(const ExactTwoBoson& exact) {
  const Eigen::MatrixXd psi = exact_wavefunction(exact);
  return 2.0 * exact.grid.spacing() * psi.cwiseAbs2().rowwise().sum();
}

double exact_relative_variance(const ExactTwoBoson& exact) {
  const RealField r = exact.relative_grid.points();
  const double dx = exact.relative_grid.spacing();
  const double norm = dx * exact.phi0.squaredNorm();
  const double r2 = dx * exact.phi0.cwiseAbs2().dot(r.cwiseAbs2()) / norm;
  return 0.25 * r2;
}

double com_spread_variance(double t, int n_particles, double lambda0) {
  if (n_particles < 1 || !(lambda0 > 0.0)) throw std::invalid_argument("com_spread_variance: invalid N or lambda0");
  const double l2 = lambda0 * lambda0;
  const double s = t / l2;
  return l2 / (2.0 * n_particles) * (1.0 + s * s);
}

BoundState bound_state(double g) {
  if (!(g < 0.0) || !std::isfinite(g)) throw std::invalid_argument("bound_state: requires g < 0");
  BoundState bs;
  bs.coupling = g;
  const double kappa = 0.5 * std::abs(g);
  // Trapezoid error on the cusp is (kappa h)^2 / 3 relative; kappa h = 1e-4.
  const double h = 1e-4 / kappa;
  const int half = 200000;
  bs.grid = Grid(2.0 * half * h, 2 * half + 1, 0.0);
  bs.phi.resize(bs.grid.size());
  for (int i = 0; i < bs.grid.size(); ++i) bs.phi[i] = std::sqrt(kappa) * std::exp(-kappa * std::abs(bs.grid.x(i)));
  const RealField r = bs.grid.points();
  const RealField dens = bs.phi.cwiseAbs2();
  bs.quadrature_norm = h * dens.sum();
  bs.quadrature_variance = h * dens.dot(r.cwiseAbs2());
  bs.variance = 2.0 / (g * g);
  return bs;
}

}  // namespace comcheck
