#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "comcheck/grid.hpp"

using namespace comcheck;

TEST_CASE("grid nodes include both walls") {
  const Grid g(10.0, 101, 1.0);
  CHECK(g.spacing() == doctest::Approx(0.1));
  CHECK(g.left() == doctest::Approx(-4.0));
  CHECK(g.right() == doctest::Approx(6.0));
  CHECK(g.x(50) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Grid(10.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(Grid(-1.0, 100), std::invalid_argument);
}

TEST_CASE("five-point laplacian is fourth order in the interior") {
  double err_prev = 0.0;
  for (int n : {101, 201}) {
    const Grid g(10.0, n);
    ComplexField f(n);
    for (int i = 0; i < n; ++i) f[i] = std::exp(-g.x(i) * g.x(i));
    const ComplexField lap = laplacian5(f, g);
    double err = 0.0;
    for (int i = 2; i < n - 2; ++i) {
      const double x = g.x(i);
      err = std::max(err, std::abs(lap[i] - (4 * x * x - 2) * std::exp(-x * x)));
    }
    if (err_prev > 0) CHECK(err_prev / err > 12.0);
    err_prev = err;
  }
}

TEST_CASE("laplacian columns match the single-field version") {
  const Grid g(6.0, 61);
  Eigen::MatrixXcd in(61, 2);
  for (int i = 0; i < 61; ++i) {
    in(i, 0) = std::exp(-g.x(i) * g.x(i));
    in(i, 1) = cplx(0, 1) * g.x(i) * std::exp(-g.x(i) * g.x(i));
  }
  Eigen::MatrixXcd out;
  laplacian5_columns(in, g, out);
  for (int k = 0; k < 2; ++k) CHECK((out.col(k) - laplacian5(in.col(k), g)).norm() < 1e-12);
}

TEST_CASE("laplacian is hermitian under the rectangle rule") {
  const Grid g(6.0, 41);
  ComplexField f(41), h(41);
  for (int i = 0; i < 41; ++i) {
    f[i] = std::exp(-g.x(i) * g.x(i)) * cplx(1.0, g.x(i));
    h[i] = std::exp(-(g.x(i) - 0.5) * (g.x(i) - 0.5));
  }
  const cplx a = quadrature(f, laplacian5(h, g), g);
  const cplx b = std::conj(quadrature(h, laplacian5(f, g), g));
  CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("quadrature of a gaussian") {
  const Grid g(20.0, 401);
  RealField f(401);
  for (int i = 0; i < 401; ++i) f[i] = std::exp(-g.x(i) * g.x(i));
  CHECK(integrate(f, g) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("schedules switch at their times") {
  const Schedule s(1.0, {{0.0, 0.0}, {2.0, 3.0}});
  CHECK(s.at(-1.0) == 1.0);
  CHECK(s.at(0.0) == 0.0);
  CHECK(s.at(1.9) == 0.0);
  CHECK(s.at(2.0) == 3.0);
  CHECK(Schedule(2.5).is_constant());
  const auto spec = HamiltonianSpec::trap_release(1.0, -0.5);
  CHECK(spec.omega_at(HamiltonianSpec::kBeforeStart) == 1.0);
  CHECK(spec.omega_at(0.0) == 0.0);
  CHECK(spec.coupling_at(0.0) == -0.5);
}
