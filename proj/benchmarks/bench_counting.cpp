#include <benchmark/benchmark.h>

#include "quasiband/finite_volume.hpp"
#include "quasiband/floquet.hpp"
#include "quasiband/lattice.hpp"

using namespace quasiband;

namespace {

SymmetricOperator half_line_well(int radius) {
  SiteFunction q{{half_line_site(1), -1.0}, {half_line_site(2), 0.5}};
  return assemble_static(build_hypercubic(1), {radius, Boundary::Dirichlet, true}, q);
}

void BM_CountBelowDense(benchmark::State& state) {
  const auto m = half_line_well(static_cast<int>(state.range(0)));
  CountOptions opts;
  opts.dense_limit = 1 << 30;
  for (auto _ : state) benchmark::DoNotOptimize(count_below(m, -1e-6, opts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CountBelowDense)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_CountBelowSparse(benchmark::State& state) {
  const auto m = half_line_well(static_cast<int>(state.range(0)));
  CountOptions opts;
  opts.dense_limit = 0;
  for (auto _ : state) benchmark::DoNotOptimize(count_below(m, -1e-6, opts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CountBelowSparse)->RangeMultiplier(2)->Range(128, 8192)->Complexity();

void BM_CountBelowCubic(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  SiteFunction q{{Site{}, -10.0}};
  const auto m = assemble_static(build_hypercubic(3), {r, Boundary::Dirichlet, false}, q);
  for (auto _ : state) benchmark::DoNotOptimize(count_below(m, -1e-6));
  state.counters["n"] = static_cast<double>(m.dimension());
}
BENCHMARK(BM_CountBelowCubic)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_BandStructure(benchmark::State& state) {
  const auto g = build_hypercubic(static_cast<int>(state.range(0)));
  const int grid = state.range(0) == 3 ? 32 : 128;
  for (auto _ : state) benchmark::DoNotOptimize(band_structure(g, grid).s_top);
}
BENCHMARK(BM_BandStructure)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_AssembleQuasiEnergy(benchmark::State& state) {
  const auto g = build_hypercubic(1);
  std::vector<Site> sites;
  for (int n = 1; n <= 5; ++n) sites.push_back(half_line_site(n));
  const auto v = cosine_potential(6.0, sites, 0.9);
  const TruncationSpec spec{static_cast<int>(state.range(0)), Boundary::Dirichlet, true};
  for (auto _ : state) benchmark::DoNotOptimize(assemble_quasienergy(g, v, spec, 10).matrix().nonZeros());
}
BENCHMARK(BM_AssembleQuasiEnergy)->Arg(100)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_QuasiCountGap(benchmark::State& state) {
  const auto g = build_hypercubic(1);
  std::vector<Site> sites;
  for (int n = 1; n <= 5; ++n) sites.push_back(half_line_site(n));
  const auto v = cosine_potential(6.0, sites, 0.9);
  const auto q = assemble_quasienergy(g, v, {static_cast<int>(state.range(0)), Boundary::Dirichlet, true}, 10);
  for (auto _ : state) benchmark::DoNotOptimize(quasi_count(q, {-2.0, 0.0, "gamma"}).filtered);
}
BENCHMARK(BM_QuasiCountGap)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
