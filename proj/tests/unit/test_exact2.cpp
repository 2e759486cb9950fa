#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "comcheck/exact2.hpp"

using namespace comcheck;

namespace {

// Lowest eigenvalue of the discretized relative problem
// -f'' + r^2/4 f + g delta(r) f by Sturm-sequence bisection.
double relative_ground_energy(double g, double half_width, int n) {
  const double dr = 2 * half_width / (n - 1);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) {
    const double r = -half_width + i * dr;
    diag[i] = 2 / (dr * dr) + r * r / 4;
  }
  diag[(n - 1) / 2] += g / dr;
  const double off = -1 / (dr * dr);
  auto below = [&](double lambda) {
    int count = 0;
    double d = diag[0] - lambda;
    if (d < 0) ++count;
    for (int i = 1; i < n; ++i) {
      d = diag[i] - lambda - off * off / (d == 0 ? 1e-300 : d);
      if (d < 0) ++count;
    }
    return count;
  };
  double lo = -g * g, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("nu root agrees with a finite-difference relative Hamiltonian") {
  for (double g : {-0.3, -1.0, -2.0, -3.1623}) {
    CAPTURE(g);
    const double nu = solve_nu(g);
    CHECK(std::abs(nu_residual(nu, g)) < 1e-10);
    CHECK(nu < 0);
    CHECK(nu + 0.5 == doctest::Approx(relative_ground_energy(g, 12.0, 24001)).epsilon(2e-4));
  }
}

TEST_CASE("weak coupling limit of nu") {
  const double g = -1e-4;
  CHECK(solve_nu(g) == doctest::Approx(g / std::sqrt(2 * M_PI)).epsilon(1e-3));
  CHECK_THROWS_AS(solve_nu(0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_nu(0.5), std::invalid_argument);
}

TEST_CASE("exact ground state invariants") {
  const Grid grid(14.0, 700);
  for (double g : {-0.5, -2.0}) {
    CAPTURE(g);
    const auto ex = ground_state(g, grid);
    CHECK(ex.energy == doctest::Approx(ex.nu + 1.0));
    CHECK(ex.edge_amplitude < kExactEdgeLimit);

    const Eigen::MatrixXd psi = exact_wavefunction(ex);
    const double dx = grid.spacing();
    CHECK(psi.squaredNorm() * dx * dx == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((psi - psi.transpose()).norm() < 1e-12);

    const auto occ = exact_spdm(ex);
    CHECK(occ.sum() == doctest::Approx(2.0).epsilon(1e-10));
    for (std::size_t i = 1; i < occ.occupations.size(); ++i) {
      CHECK(occ.occupations[i - 1] >= occ.occupations[i]);
      CHECK(occ.occupations[i] > -1e-12);
    }

    const RealField rho = exact_density(ex);
    CHECK(integrate(rho, grid) == doctest::Approx(2.0).epsilon(1e-10));
    const double sigma_r2 = com_variance_from_two_body(exact_two_body_density(ex), grid, 2);
    CHECK(sigma_r2 == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(density_variance(rho, grid) == doctest::Approx(0.25 + exact_relative_variance(ex)).epsilon(1e-6));
  }
}

TEST_CASE("exact occupancies converge under grid refinement") {
  const auto coarse = exact_spdm(ground_state(-1.0, Grid(14.0, 700)));
  const auto fine = exact_spdm(ground_state(-1.0, Grid(14.0, 1400)));
  for (int k = 0; k < 3; ++k) CHECK(coarse.occupations[k] == doctest::Approx(fine.occupations[k]).epsilon(1e-3));
}

TEST_CASE("stronger attraction depletes the condensate") {
  const Grid grid(14.0, 700);
  double prev = 2.0;
  for (double g : {-0.5, -1.0, -2.0, -3.0}) {
    const double n1 = exact_spdm(ground_state(g, grid)).occupations[0];
    CHECK(n1 < prev);
    prev = n1;
  }
}

TEST_CASE("box too small for the exact state is rejected") {
  CHECK_THROWS_AS(ground_state(-1.0, Grid(3.0, 100)), std::invalid_argument);
}

TEST_CASE("ballistic center-of-mass spreading") {
  CHECK(com_spread_variance(0.0, 2) == doctest::Approx(0.25));
  CHECK(com_spread_variance(2.0, 2) == doctest::Approx(1.25));
  CHECK(com_spread_variance(1.0, 100, 2.0) == doctest::Approx(4.0 / 200 * (1 + 1.0 / 16)));
}

TEST_CASE("free-space bound state") {
  for (double g : {-1.0, -3.0}) {
    const auto b = bound_state(g);
    CHECK(b.variance == doctest::Approx(2 / (g * g)));
    CHECK(b.quadrature_norm == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(b.quadrature_variance == doctest::Approx(b.variance).epsilon(1e-3));
  }
  CHECK_THROWS(bound_state(1.0));
}
