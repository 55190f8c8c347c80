// Timings for the hot paths: cone build/classify, block spectra, sigma solve.

#include <benchmark/benchmark.h>

#include <random>

#include "cone_oracle.hpp"
#include "fixtures.hpp"
#include "hym/flow.hpp"
#include "hym/slice.hpp"

using namespace hym;

static void BM_ConeBuild(benchmark::State& st) {
  std::mt19937_64 rng(7);
  auto I = oracle::random_instance(rng, 4, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(cone::build_cones(I.total, I.D, I.K));
}
BENCHMARK(BM_ConeBuild)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_ConeClassify(benchmark::State& st) {
  std::mt19937_64 rng(7);
  auto I = oracle::random_instance(rng, 4, 50);
  auto C = cone::build_cones(I.total, I.D, I.K);
  auto p = oracle::random_point(rng, I.K);
  for (auto _ : st) benchmark::DoNotOptimize(cone::classify(p, C));
}
BENCHMARK(BM_ConeClassify)->Unit(benchmark::kMicrosecond);

static void BM_Laplacian01(benchmark::State& st) {
  const Lattice L(TorusGrid(static_cast<int>(st.range(0)), 1.0, 1.0), fx::t4x());
  const Form a = random_form(0, 1, L.r(), L.n2(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(L.laplacian01(a));
}
BENCHMARK(BM_Laplacian01)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_SliceInit(benchmark::State& st) {
  const Lattice L(TorusGrid(8, 1.0, 1.0), fx::t4x());
  for (auto _ : st) {
    Slice S(L);
    benchmark::DoNotOptimize(S.V().dim());
  }
}
BENCHMARK(BM_SliceInit)->Unit(benchmark::kMillisecond)->Iterations(2);

static void BM_SigmaSolve(benchmark::State& st) {
  const Lattice L(TorusGrid(8, 1.0, 1.0), fx::t4x());
  const Slice S(L);
  CVec b = CVec::Zero(S.V().dim());
  b[0] = 0.1;
  Perturbation e;
  e.dt1 = 0.01;
  e.dt2 = -0.01;
  for (auto _ : st) benchmark::DoNotOptimize(S.sigma_solve(e, b));
}
BENCHMARK(BM_SigmaSolve)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_VectorField(benchmark::State& st) {
  const Lattice L(TorusGrid(8, 1.0, 1.0), fx::t4x());
  const Slice S(L);
  CVec b = CVec::Zero(S.V().dim());
  b[0] = 0.1;
  Perturbation e;
  e.dt1 = 0.01;
  e.dt2 = -0.01;
  for (auto _ : st) benchmark::DoNotOptimize(flow::vector_field(S, e, b));
}
BENCHMARK(BM_VectorField)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
