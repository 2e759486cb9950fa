#include <benchmark/benchmark.h>

#include "comcheck/exact2.hpp"
#include "comcheck/fock.hpp"
#include "comcheck/mctdhb.hpp"
#include "comcheck/observables.hpp"

using namespace comcheck;

namespace {

MctdhbState bench_state(int n, int m, int points) {
  const Grid grid(10.0, points);
  MctdhbState s = init_product_state({ShapeKind::kGaussian, 1.0, {}}, n, m, grid);
  s.coefficients = CoefficientVector::Random(static_cast<Eigen::Index>(s.basis->size())).normalized();
  return s;
}

// args: N, M
void BM_Matvec(benchmark::State& st) {
  const auto s = bench_state(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)), 201);
  const auto ops = project_hamiltonian(s.orbitals, s.grid, HamiltonianSpec::constant(1.0, -0.5), 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(apply_many_body_h(s.coefficients, ops, *s.basis));
  st.counters["configs"] = static_cast<double>(s.basis->size());
}
BENCHMARK(BM_Matvec)->Args({2, 10})->Args({100, 3})->Args({1000, 2})->Args({10, 6});

void BM_ReducedDensities(benchmark::State& st) {
  const auto s = bench_state(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)), 201);
  for (auto _ : st) benchmark::DoNotOptimize(reduced_densities(s.coefficients, *s.basis));
}
BENCHMARK(BM_ReducedDensities)->Args({2, 10})->Args({100, 3})->Args({10, 6});

// args: N, M, grid points
void BM_EomRhs(benchmark::State& st) {
  const auto s = bench_state(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)), static_cast<int>(st.range(2)));
  const auto spec = HamiltonianSpec::constant(1.0, -0.5);
  for (auto _ : st) benchmark::DoNotOptimize(eom_rhs(s, spec));
}
BENCHMARK(BM_EomRhs)->Args({2, 10, 600})->Args({100, 3, 269})->Args({1000, 2, 1201});

void BM_RealTimeStep(benchmark::State& st) {
  const auto s = bench_state(2, static_cast<int>(st.range(0)), 600);
  const auto spec = HamiltonianSpec::trap_release(1.0, -3.16);
  for (auto _ : st) benchmark::DoNotOptimize(step(s, spec, 1e-4, TimeMode::kReal));
}
BENCHMARK(BM_RealTimeStep)->Arg(1)->Arg(5)->Arg(10);

void BM_ComVariance(benchmark::State& st) {
  const auto s = bench_state(2, 10, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(com_variance(s));
}
BENCHMARK(BM_ComVariance)->Arg(281)->Arg(600);

void BM_ComVarianceTwoBody(benchmark::State& st) {
  const auto s = bench_state(2, 10, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(com_variance_from_two_body(two_body_density(s), s.grid, 2));
}
BENCHMARK(BM_ComVarianceTwoBody)->Arg(281)->Arg(600);

void BM_ExactGroundState(benchmark::State& st) {
  const Grid grid(14.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ground_state(-3.1623, grid));
}
BENCHMARK(BM_ExactGroundState)->Arg(700)->Arg(1400)->Unit(benchmark::kMillisecond);

void BM_ExactSpdm(benchmark::State& st) {
  const auto ex = ground_state(-3.1623, Grid(14.0, static_cast<int>(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(exact_spdm(ex));
}
BENCHMARK(BM_ExactSpdm)->Arg(700)->Arg(1400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
