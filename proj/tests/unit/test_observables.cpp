#include <doctest.h>

#include <cmath>

#include "comcheck/observables.hpp"
#include "test_support.hpp"

using namespace comcheck;

TEST_CASE("sech product state has the closed-form center-of-mass variance") {
  const Grid grid(40.0, 4001);
  const int n = 1000;
  const auto s = init_product_state({ShapeKind::kSech, 1.0, {}}, n, 1, grid);
  CHECK(density_variance(s) == doctest::Approx(M_PI * M_PI / 12).epsilon(1e-7));
  CHECK(com_variance(s) == doctest::Approx(M_PI * M_PI / 12 / n).epsilon(1e-7));
}

TEST_CASE("contraction route matches the explicit two-body integral") {
  const Grid grid(10.0, 101);
  for (auto [n, m, seed] : {std::tuple{2, 2, 1u}, std::tuple{3, 3, 2u}, std::tuple{6, 2, 3u}}) {
    const auto s = testing::random_state(n, m, grid, seed);
    const Eigen::MatrixXd rho2 = two_body_density(s);
    CHECK(com_variance(s) == doctest::Approx(com_variance_from_two_body(rho2, grid, n)).epsilon(1e-10));
    const double dx = grid.spacing();
    CHECK(rho2.sum() * dx * dx == doctest::Approx(n * (n - 1)).epsilon(1e-10));
    const Eigen::VectorXd marginal = rho2.rowwise().sum() * dx;
    const RealField rho = density(s);
    CHECK((marginal - (n - 1) * rho).cwiseAbs().maxCoeff() < 1e-10 * rho.maxCoeff() * n);
    CHECK(integrate(rho, grid) == doctest::Approx(n).epsilon(1e-12));
  }
}

TEST_CASE("center-of-mass variance never exceeds the density variance") {
  const Grid grid(10.0, 101);
  for (unsigned seed = 10; seed < 20; ++seed) {
    const auto s = testing::random_state(4, 3, grid, seed);
    CHECK(com_variance(s) <= density_variance(s) + 1e-12);
    CHECK(com_variance(s) > 0.0);
  }
}

TEST_CASE("natural occupancies are sorted and sum to N") {
  const Grid grid(10.0, 101);
  const auto s = testing::random_state(5, 4, grid, 42);
  const auto occ = natural_occupancies(s);
  CHECK(occ.sum() == doctest::Approx(5.0).epsilon(1e-12));
  for (std::size_t i = 1; i < occ.occupations.size(); ++i) CHECK(occ.occupations[i - 1] >= occ.occupations[i]);
  const auto f = occ.fractions();
  CHECK(f[0] == doctest::Approx(occ.occupations[0] / 5.0));
  // Natural orbitals are orthonormal.
  const Eigen::MatrixXcd ov = occ.natural_orbitals.adjoint() * occ.natural_orbitals * grid.spacing();
  CHECK((ov - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("measure agrees with the individual observables") {
  const Grid grid(10.0, 101);
  const auto s = testing::random_state(3, 2, grid, 8);
  const auto spec = HamiltonianSpec::constant(1.0, -0.4);
  const auto m = measure(s, spec, 0.0);
  CHECK(m.energy == doctest::Approx(total_energy(s, spec, 0.0)).epsilon(1e-12));
  CHECK(m.sigma_r2 == doctest::Approx(com_variance(s)).epsilon(1e-12));
  CHECK(m.sigma_n2 == doctest::Approx(density_variance(s)).epsilon(1e-12));
  CHECK(m.occupations.size() == 2);
}

TEST_CASE("soliton variance") {
  CHECK(soliton_variance(2, -1.0) == doctest::Approx(M_PI * M_PI / 3));
  CHECK(soliton_variance(100, -0.1) == doctest::Approx(M_PI * M_PI / (3 * 0.01 * 99 * 99)));
  CHECK_THROWS(soliton_variance(2, 0.0));
  CHECK_THROWS(soliton_variance(1, -1.0));
}

TEST_CASE("two-body density respects its memory cap") {
  const Grid grid(10.0, 101);
  const auto s = testing::random_state(2, 2, grid, 4);
  CHECK_THROWS_AS(two_body_density(s, 100), ResourceLimitError);
}
