#include "comcheck/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace comcheck {

std::vector<double> OccupancySpectrum::fractions() const {
  std::vector<double> f(occupations.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = occupations[i] / particles;
  return f;
}

double OccupancySpectrum::sum() const { return std::accumulate(occupations.begin(), occupations.end(), 0.0); }

namespace {

RealField density_from(const ModeMatrix& rho1, const Eigen::MatrixXcd& orbitals) {
  // rho(x) = sum_kq rho1_kq conj(phi_k) phi_q = Re[ sum_k conj(phi_k) (Phi rho1^T)_k ]
  const Eigen::MatrixXcd mixed = orbitals * rho1.transpose();
  return (orbitals.conjugate().array() * mixed.array()).rowwise().sum().real();
}

void pin_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs2().maxCoeff(&imax);
  const double a = std::abs(v[imax]);
  if (a > 0.0) v *= std::conj(v[imax]) / a;
}

}  // namespace

RealField density(const MctdhbState& state) {
  const ReducedDensities rd = reduced_densities(state.coefficients, *state.basis);
  return density_from(rd.rho1, state.orbitals);
}

OccupancySpectrum occupancies_from_rho1(const ModeMatrix& rho1, const Eigen::MatrixXcd& orbitals, int particles) {
  const ModeMatrix herm = 0.5 * (rho1 + rho1.adjoint());
  Eigen::SelfAdjointEigenSolver<ModeMatrix> eig(herm);
  if (eig.info() != Eigen::Success) throw std::runtime_error("natural_occupancies: eigensolver failed");
  const int m = static_cast<int>(rho1.rows());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  // Eigen returns ascending eigenvalues; reverse, keeping solver order on ties.
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eig.eigenvalues()[a] > eig.eigenvalues()[b]; });
  OccupancySpectrum spec;
  spec.particles = particles;
  spec.occupations.resize(m);
  spec.natural_orbitals.resize(orbitals.rows(), m);
  for (int a = 0; a < m; ++a) {
    const int src = order[a];
    spec.occupations[a] = eig.eigenvalues()[src];
    // rho(x,y) = sum_a n_a conj(chi_a(x)) chi_a(y) with chi_a = Phi conj(U_a).
    spec.natural_orbitals.col(a) = orbitals * eig.eigenvectors().col(src).conjugate();
    pin_phase(spec.natural_orbitals.col(a));
  }
  return spec;
}

OccupancySpectrum natural_occupancies(const MctdhbState& state) {
  const ReducedDensities rd = reduced_densities(state.coefficients, *state.basis);
  return occupancies_from_rho1(rd.rho1, state.orbitals, state.particles());
}

Eigen::MatrixXd two_body_density(const MctdhbState& state, std::size_t max_entries) {
  const auto n = static_cast<std::size_t>(state.grid.size());
  if (n * n > max_entries) {
    throw ResourceLimitError("two_body_density: grid^2 = " + std::to_string(n * n) + " exceeds cap " +
                             std::to_string(max_entries));
  }
  const int m = state.modes();
  const auto& pairs = state.basis->pairs();
  const ReducedDensities rd = reduced_densities(state.coefficients, *state.basis);
  // G_(kq)(x) = conj(phi_k(x)) phi_q(x); rho2(x,y) = sum G_(kq)(x) rho2_ksql G_(sl)(y).
  Eigen::MatrixXcd g(state.grid.size(), m * m);
  for (int k = 0; k < m; ++k)
    for (int q = 0; q < m; ++q)
      g.col(k * m + q) = state.orbitals.col(k).conjugate().cwiseProduct(state.orbitals.col(q));
  Eigen::MatrixXcd kernel(m * m, m * m);
  for (int k = 0; k < m; ++k)
    for (int q = 0; q < m; ++q)
      for (int s = 0; s < m; ++s)
        for (int l = 0; l < m; ++l) kernel(k * m + q, s * m + l) = rd.rho2_pairs(pairs(k, s), pairs(q, l));
  const Eigen::MatrixXcd tmp = g * kernel;
  return (tmp * g.transpose()).real();
}

double com_variance(const ReducedDensities& rd, const Eigen::MatrixXcd& orbitals, const Grid& grid, int particles) {
  const int m = static_cast<int>(orbitals.cols());
  const double dx = grid.spacing();
  const RealField xs = grid.points();
  const Eigen::MatrixXcd xphi = xs.asDiagonal() * orbitals;
  const ModeMatrix x1 = dx * orbitals.adjoint() * xphi;  // <phi_k|x|phi_q>
  const ModeMatrix x2 = dx * xphi.adjoint() * xphi;      // <phi_k|x^2|phi_q>
  const double n = particles;

  const double mean_x = (x1.array() * rd.rho1.array()).sum().real() / n;
  double second = (x2.array() * rd.rho1.array()).sum().real();
  if (particles >= 2) {
    const PairIndex pairs(m);
    cplx corr{};
    for (int k = 0; k < m; ++k)
      for (int s = 0; s < m; ++s)
        for (int q = 0; q < m; ++q)
          for (int l = 0; l < m; ++l) corr += rd.rho2_pairs(pairs(k, s), pairs(q, l)) * x1(k, q) * x1(s, l);
    second += corr.real();
  }
  return second / (n * n) - mean_x * mean_x;
}

double com_variance(const MctdhbState& state) {
  const ReducedDensities rd = reduced_densities(state.coefficients, *state.basis);
  return com_variance(rd, state.orbitals, state.grid, state.particles());
}

double com_variance_from_two_body(const Eigen::MatrixXd& rho2, const Grid& grid, int particles) {
  if (particles < 2) throw std::invalid_argument("com_variance_from_two_body: needs N >= 2");
  const int n = grid.size();
  if (rho2.rows() != n || rho2.cols() != n) throw std::invalid_argument("com_variance_from_two_body: shape");
  const double dx = grid.spacing();
  const RealField xs = grid.points();
  const double big_n = particles;
  double second = 0.0;
  double first = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double w = rho2(i, j) * dx * dx;
      second += (xs[i] * xs[i] + (big_n - 1.0) * xs[i] * xs[j]) * w;
      first += xs[i] * w;
    }
  }
  second /= big_n * big_n * (big_n - 1.0);
  const double mean_r = first / (big_n * (big_n - 1.0));
  return second - mean_r * mean_r;
}

double density_variance(const RealField& rho, const Grid& grid) {
  const RealField xs = grid.points();
  const double norm = rho.sum();
  if (!(norm > 0.0)) throw std::invalid_argument("density_variance: density integrates to zero");
  const double mean = rho.dot(xs) / norm;
  const double second = rho.dot(xs.cwiseAbs2()) / norm;
  return second - mean * mean;
}

double density_variance(const MctdhbState& state) { return density_variance(density(state), state.grid); }

double soliton_variance(int particles, double g) {
  if (g == 0.0) throw std::invalid_argument("soliton_variance: g = 0 gives an unbound state");
  if (particles < 2) throw std::invalid_argument("soliton_variance: needs N >= 2");
  const double nm1 = particles - 1.0;
  return std::numbers::pi * std::numbers::pi / (3.0 * g * g * nm1 * nm1);
}

double total_energy(const MctdhbState& state, const HamiltonianSpec& spec, double t) {
  const ModeOperators ops = project_hamiltonian(state.orbitals, state.grid, spec, t);
  const ReducedDensities rd = reduced_densities(state.coefficients, *state.basis);
  return energy_from_densities(ops, rd, state.basis->pairs());
}

Measurement measure(const MctdhbState& state, const HamiltonianSpec& spec, double t) {
  const ReducedDensities rd = reduced_densities_unchecked(state.coefficients, *state.basis);
  const ModeOperators ops = project_hamiltonian(state.orbitals, state.grid, spec, t);
  Measurement m;
  m.energy = energy_from_densities(ops, rd, state.basis->pairs());
  m.sigma_r2 = com_variance(rd, state.orbitals, state.grid, state.particles());
  m.sigma_n2 = density_variance(density_from(rd.rho1, state.orbitals), state.grid);
  m.occupations = occupancies_from_rho1(rd.rho1, state.orbitals, state.particles()).occupations;
  return m;
}

}  // namespace comcheck
