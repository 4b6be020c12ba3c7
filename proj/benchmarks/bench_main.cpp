#include <benchmark/benchmark.h>

#include "rgbp/exact.hpp"
#include "rgbp/gbp.hpp"
#include "rgbp/pursuit.hpp"

using namespace rgbp;

namespace {

RegionGraph grid_with_squares(const FactorGraph& fg, int count) {
  auto rg = bethe_region_graph(fg);
  PursuitConfig cfg;
  cfg.max_loop_len = 4;
  auto pool = candidate_pool(fg, rg, cfg);
  for (int i = 0; i < count && i < static_cast<int>(pool.size()); ++i)
    rg = add_outer_region(rg, fg, pool[static_cast<std::size_t>(i)]);
  return rg;
}

void BM_GbpSweepGridBethe(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto fg = gen_grid(n, n, 1.0, 0.5, 1);
  auto rg = bethe_region_graph(fg);
  GBPOptions opts;
  opts.max_iters = 1;
  for (auto _ : state) {
    auto out = run_gbp(rg, fg, opts);
    benchmark::DoNotOptimize(out.first.max_residual);
  }
}
BENCHMARK(BM_GbpSweepGridBethe)->Arg(4)->Arg(6)->Arg(8);

void BM_GbpSweepGridSquares(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto fg = gen_grid(n, n, 1.0, 0.5, 1);
  auto rg = grid_with_squares(fg, (n - 1) * (n - 1));
  GBPOptions opts;
  opts.max_iters = 1;
  for (auto _ : state) {
    auto out = run_gbp(rg, fg, opts);
    benchmark::DoNotOptimize(out.first.max_residual);
  }
}
BENCHMARK(BM_GbpSweepGridSquares)->Arg(4)->Arg(6);

void BM_VariableElimination(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto fg = gen_grid(n, n, 1.0, 0.5, 1);
  for (auto _ : state) {
    auto res = exact_variable_elimination(fg);
    benchmark::DoNotOptimize(res.log_partition);
  }
}
BENCHMARK(BM_VariableElimination)->Arg(4)->Arg(6);

void BM_ChordlessCycles(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto fg = gen_fully_connected(n, 0.3, 0.5, 1);
  for (auto _ : state) {
    auto cycles = enumerate_chordless_cycles(fg, 4);
    benchmark::DoNotOptimize(cycles.size());
  }
}
BENCHMARK(BM_ChordlessCycles)->Arg(7)->Arg(10);

void BM_TreewidthExact(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  UGraph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 3) % n);
  for (auto _ : state) benchmark::DoNotOptimize(treewidth_exact(g));
}
BENCHMARK(BM_TreewidthExact)->Arg(8)->Arg(12)->Arg(14);

void BM_LocalDeltaF(benchmark::State& state) {
  auto fg = gen_grid(6, 6, 1.0, 0.5, 1);
  auto rg = bethe_region_graph(fg);
  GBPOptions opts;
  auto [st, bel] = run_gbp(rg, fg, opts);
  PursuitConfig cfg;
  cfg.max_loop_len = 4;
  auto pool = candidate_pool(fg, rg, cfg);
  for (auto _ : state) {
    auto score = local_delta_f(rg, fg, st, bel, pool.front(), opts);
    benchmark::DoNotOptimize(score);
  }
}
BENCHMARK(BM_LocalDeltaF);

}  // namespace

BENCHMARK_MAIN();
