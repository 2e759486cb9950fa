#include <doctest.h>

#include <cmath>

#include "comcheck/mctdhb.hpp"
#include "comcheck/observables.hpp"
#include "test_support.hpp"

using namespace comcheck;

namespace {

MctdhbState relaxed(int n, int m, double g, const Grid& grid) {
  RelaxOptions opt;
  opt.dtau = 2e-3;
  opt.energy_tolerance = 1e-12;
  const auto init = init_product_state({ShapeKind::kGaussian, 1.0, {}}, n, m, grid);
  return relax(init, HamiltonianSpec::constant(1.0, g), opt).state;
}

HamiltonianSpec quench(double g_before, double g_after) {
  HamiltonianSpec spec;
  spec.omega = Schedule(1.0);
  spec.coupling = Schedule::step_at_zero(g_before, g_after);
  return spec;
}

}  // namespace

TEST_CASE("product state is orthonormal with all particles in the first mode") {
  const Grid grid(12.0, 121);
  const auto s = init_product_state({ShapeKind::kSech, 1.0, {}}, 5, 4, grid);
  CHECK(s.orthonormality_error() < 1e-12);
  CHECK(s.norm_error() < 1e-14);
  CHECK(std::abs(s.coefficients[0]) == doctest::Approx(1.0));
  const auto occ = natural_occupancies(s);
  CHECK(occ.occupations[0] == doctest::Approx(5.0));
}

TEST_CASE("non-interacting trapped relaxation reaches N omega / 2") {
  const Grid grid(12.0, 121);
  for (int m : {1, 2}) {
    RelaxOptions opt;
    opt.dtau = 2e-3;
    opt.energy_tolerance = 1e-12;
    const auto init = init_product_state({ShapeKind::kGaussian, 1.4, {}}, 2, m, grid);
    const auto r = relax(init, HamiltonianSpec::constant(1.0, 0.0), opt);
    CHECK(r.energy == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(com_variance(r.state) == doctest::Approx(0.25).epsilon(1e-4));
  }
}

TEST_CASE("attractive relaxation lowers the energy with more modes") {
  const Grid grid(12.0, 121);
  const auto spec = HamiltonianSpec::constant(1.0, -1.0);
  const double e1 = total_energy(relaxed(2, 1, -1.0, grid), spec, 0.0);
  const double e3 = total_energy(relaxed(2, 3, -1.0, grid), spec, 0.0);
  CHECK(e3 < e1);
  CHECK(e1 < 1.0);
}

TEST_CASE("free gaussian spreads ballistically") {
  const Grid grid(40.0, 801);
  const auto init = init_product_state({ShapeKind::kGaussian, 1.0, {}}, 1, 1, grid);
  PropagateOptions opt;
  opt.t_final = 1.0;
  opt.dt = 1e-3;
  opt.record_every = 250;
  const auto res = propagate(init, HamiltonianSpec::constant(0.0, 0.0, UnitSystem::kUntrapped), opt);
  REQUIRE(res.series.size() == 5);
  for (std::size_t i = 0; i < res.series.size(); ++i) {
    const double t = res.series.times[i];
    CHECK(res.series.sigma_n2[i] == doctest::Approx(0.5 * (1 + t * t)).epsilon(1e-5));
    CHECK(res.series.sigma_r2[i] == doctest::Approx(0.5 * (1 + t * t)).epsilon(1e-5));
  }
}

TEST_CASE("real-time propagation conserves norm, overlaps and energy") {
  const Grid grid(12.0, 121);
  const auto init = relaxed(2, 3, -1.0, grid);
  const auto spec = quench(-1.0, -2.0);
  MctdhbState s = init;
  const double e0 = total_energy(s, spec, 0.0);
  double worst_norm = 0, worst_overlap = 0;
  for (int i = 0; i < 500; ++i) {
    StepInfo info;
    s = step(s, spec, 1e-3, StepOptions{}, &info);
    worst_norm = std::max(worst_norm, info.norm_drift);
    worst_overlap = std::max(worst_overlap, info.orthonormality_drift);
  }
  CHECK(s.time == doctest::Approx(0.5));
  CHECK(worst_norm < 1e-10);
  CHECK(worst_overlap < 1e-10);
  CHECK(std::abs(total_energy(s, spec, s.time) - e0) < 1e-8);
  CHECK(natural_occupancies(s).sum() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("halving the step leaves the observables unchanged") {
  const Grid grid(12.0, 121);
  const auto init = relaxed(2, 2, -1.0, grid);
  const auto spec = quench(-1.0, -2.0);
  PropagateOptions a;
  a.t_final = 0.5;
  a.dt = 2e-3;
  a.record_every = 250;
  PropagateOptions b = a;
  b.dt = 1e-3;
  b.record_every = 500;
  const auto ra = propagate(init, spec, a);
  const auto rb = propagate(init, spec, b);
  CHECK(ra.series.sigma_r2.back() == doctest::Approx(rb.series.sigma_r2.back()).epsilon(1e-8));
  CHECK(ra.series.sigma_n2.back() == doctest::Approx(rb.series.sigma_n2.back()).epsilon(1e-8));
  CHECK(ra.series.occupations.back()[1] == doctest::Approx(rb.series.occupations.back()[1]).epsilon(1e-6));
}

TEST_CASE("imaginary-time derivative keeps the coefficient norm to first order") {
  const Grid grid(12.0, 121);
  const auto s = testing::random_state(3, 3, grid, 5);
  const auto d = eom_rhs(s, HamiltonianSpec::constant(1.0, -0.5), TimeMode::kImaginary, 0.0);
  CHECK(std::abs(s.coefficients.dot(d.coefficients).real()) < 1e-10);
  // Projector gauge: orbital derivatives are orthogonal to the orbital space.
  CHECK((s.orbitals.adjoint() * d.orbitals * grid.spacing()).norm() < 1e-9);
}

TEST_CASE("singular one-body density engages the regularization") {
  const Grid grid(12.0, 121);
  const auto s = init_product_state({ShapeKind::kGaussian, 1.0, {}}, 4, 2, grid);
  const auto d = eom_rhs(s, HamiltonianSpec::constant(1.0, -0.5));
  CHECK(d.regularized);
  CHECK(d.min_rho1_eigenvalue < 1e-12);
}

TEST_CASE("too large a step is rejected") {
  const Grid grid(12.0, 121);
  const auto s = relaxed(2, 2, -1.0, grid);
  CHECK_THROWS_AS(step(s, quench(-1.0, -2.0), 0.5, TimeMode::kReal), StepRejectedError);
}

TEST_CASE("density reaching the wall aborts propagation") {
  const Grid grid(8.0, 81);
  const auto init = init_product_state({ShapeKind::kGaussian, 0.5, {}}, 1, 1, grid);
  PropagateOptions opt;
  opt.t_final = 5.0;
  opt.dt = 1e-3;
  CHECK_THROWS_AS(propagate(init, HamiltonianSpec::constant(0.0, 0.0, UnitSystem::kUntrapped), opt),
                  BoxOverflowError);
}

TEST_CASE("padding modes and embedding grids preserve the state") {
  const Grid grid(12.0, 121);
  const auto s = relaxed(2, 2, -1.0, grid);
  const auto spec = HamiltonianSpec::constant(1.0, -1.0);
  const auto m0 = measure(s, spec, 0.0);

  const auto padded = pad_modes(s, 4);
  CHECK(padded.modes() == 4);
  CHECK(padded.orthonormality_error() < 1e-12);
  const auto m1 = measure(padded, spec, 0.0);
  CHECK(m1.energy == doctest::Approx(m0.energy).epsilon(1e-12));
  CHECK(m1.sigma_r2 == doctest::Approx(m0.sigma_r2).epsilon(1e-12));

  const Grid big(24.0, 241);
  const auto e = embed_in_grid(s, big);
  CHECK(e.orbitals.rows() == 241);
  CHECK(com_variance(e) == doctest::Approx(m0.sigma_r2).epsilon(1e-12));
  CHECK(density_variance(e) == doctest::Approx(m0.sigma_n2).epsilon(1e-12));
  CHECK_THROWS(embed_in_grid(s, Grid(24.0, 200)));
}

TEST_CASE("phase pinning leaves the many-body state unchanged") {
  const Grid grid(12.0, 121);
  auto s = testing::random_state(2, 3, grid, 9);
  const RealField rho = density(s);
  const double var = com_variance(s);
  pin_orbital_phases(s);
  CHECK((density(s) - rho).norm() < 1e-12);
  CHECK(com_variance(s) == doctest::Approx(var).epsilon(1e-12));
  for (int k = 0; k < 3; ++k) {
    Eigen::Index imax;
    s.orbitals.col(k).cwiseAbs().maxCoeff(&imax);
    CHECK(std::abs(s.orbitals(imax, k).imag()) < 1e-14);
    CHECK(s.orbitals(imax, k).real() > 0);
  }
}

TEST_CASE("lanczos prediagonalization matches dense diagonalization") {
  const Grid grid(12.0, 121);
  auto s = testing::random_state(4, 3, grid, 3);
  const auto spec = HamiltonianSpec::constant(1.0, -0.8);
  const double e = diagonalize_coefficients(s, spec, 0.0);
  const auto ops = project_hamiltonian(s.orbitals, grid, spec, 0.0);
  const int d = static_cast<int>(s.basis->size());
  Eigen::MatrixXcd h(d, d);
  for (int j = 0; j < d; ++j) h.col(j) = apply_many_body_h(CoefficientVector::Unit(d, j), ops, *s.basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  CHECK(e == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-10));
}

TEST_CASE("single-orbital relaxation matches a gradient-flow mean-field oracle") {
  // Normalized gradient flow for E[phi] = N <h> + g N (N-1) / 2 int |phi|^4,
  // second-order differences, no MCTDHB machinery.
  const Grid grid(14.0, 281);
  const int n = 2;
  const double g = -2.0, dx = grid.spacing(), tau = 5e-4;
  const int np = grid.size();
  Eigen::VectorXd phi(np), next(np);
  for (int i = 0; i < np; ++i) phi[i] = std::exp(-grid.x(i) * grid.x(i) / 2);
  phi /= std::sqrt(phi.squaredNorm() * dx);
  auto energy = [&](const Eigen::VectorXd& f) {
    double kin = 0, pot = 0, inter = 0;
    for (int i = 0; i < np; ++i) {
      const double l = (i > 0 ? f[i - 1] : 0.0) + (i + 1 < np ? f[i + 1] : 0.0) - 2 * f[i];
      kin += -0.5 * f[i] * l / (dx * dx) * dx;
      pot += 0.5 * grid.x(i) * grid.x(i) * f[i] * f[i] * dx;
      inter += std::pow(f[i], 4) * dx;
    }
    return n * (kin + pot) + 0.5 * g * n * (n - 1) * inter;
  };
  double e_prev = energy(phi);
  for (int it = 0; it < 200000; ++it) {
    for (int i = 0; i < np; ++i) {
      const double l = (i > 0 ? phi[i - 1] : 0.0) + (i + 1 < np ? phi[i + 1] : 0.0) - 2 * phi[i];
      const double hphi = -0.5 * l / (dx * dx) + 0.5 * grid.x(i) * grid.x(i) * phi[i] + g * (n - 1) * std::pow(phi[i], 3);
      next[i] = phi[i] - tau * hphi;
    }
    phi = next / std::sqrt(next.squaredNorm() * dx);
    if (it % 1000 == 999) {
      const double e = energy(phi);
      if (std::abs(e - e_prev) < 1e-12) break;
      e_prev = e;
    }
  }
  const double oracle = energy(phi);
  RelaxOptions opt;
  opt.dtau = 1e-3;
  opt.energy_tolerance = 1e-12;
  const auto init = init_product_state({ShapeKind::kGaussian, 1.0, {}}, n, 1, grid);
  const auto r = relax(init, HamiltonianSpec::constant(1.0, g), opt);
  CHECK(oracle > 0.0);
  CHECK(r.energy == doctest::Approx(oracle).epsilon(2e-3));
  CHECK(r.energy == doctest::Approx(0.0915).epsilon(2e-3));
}
