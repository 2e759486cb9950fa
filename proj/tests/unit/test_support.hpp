#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "comcheck/fock.hpp"
#include "comcheck/grid.hpp"
#include "comcheck/mctdhb.hpp"

namespace testing {

using comcheck::cplx;

inline Eigen::VectorXcd random_vector(int n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
  return v;
}

// Smooth random orbitals: Gaussians with random centers, widths and phases,
// Gram-Schmidt orthonormalized with the grid quadrature.
inline Eigen::MatrixXcd random_orbitals(const comcheck::Grid& grid, int modes, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXcd phi(grid.size(), modes);
  for (int k = 0; k < modes; ++k) {
    const double c = 1.5 * u(rng), w = 0.8 + 0.3 * u(rng), kx = 2.0 * u(rng);
    for (int i = 0; i < grid.size(); ++i) {
      const double x = grid.x(i);
      phi(i, k) = std::exp(-(x - c) * (x - c) / (2 * w * w)) * std::polar(1.0, kx * x) * (1.0 + 0.3 * u(rng) * x);
    }
  }
  const double dx = grid.spacing();
  for (int k = 0; k < modes; ++k) {
    for (int j = 0; j < k; ++j) phi.col(k) -= (phi.col(j).dot(phi.col(k)) * dx) * phi.col(j);
    phi.col(k) /= std::sqrt(phi.col(k).squaredNorm() * dx);
  }
  return phi;
}

inline comcheck::MctdhbState random_state(int n, int m, const comcheck::Grid& grid, unsigned seed) {
  std::mt19937 rng(seed);
  comcheck::MctdhbState s;
  s.grid = grid;
  s.basis = comcheck::enumerate_configs(n, m);
  s.orbitals = random_orbitals(grid, m, rng);
  s.coefficients = random_vector(static_cast<int>(s.basis->size()), rng).normalized();
  return s;
}

}  // namespace testing
