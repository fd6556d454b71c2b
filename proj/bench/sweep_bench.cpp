#include <benchmark/benchmark.h>

#include "blaspe/matrix.hpp"
#include "blaspe/metrics.hpp"
#include "blaspe/tile_sim.hpp"

using namespace blaspe;

namespace {

const std::vector<AeLevel> kLevels{AeLevel::ae0, AeLevel::ae1, AeLevel::ae2,
                                   AeLevel::ae3, AeLevel::ae4, AeLevel::ae5};

void BM_AblationSweep(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const std::vector<std::size_t> ns{20, 40, 60};
  for (auto _ : state) {
    AblationReport r = ablation_report(KernelKind::gemm, ns, kLevels, PeConfig{}, kDefaultSeed, parallel);
    benchmark::DoNotOptimize(r.cells.data());
  }
}
BENCHMARK(BM_AblationSweep)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_TileArray(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  TileArrayConfig cfg;
  cfg.b = 4;
  for (auto _ : state) {
    TiledRun r = run_tiled_gemm(80, cfg, kDefaultSeed, parallel);
    benchmark::DoNotOptimize(r.latency);
  }
}
BENCHMARK(BM_TileArray)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_OracleGemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const bool parallel = state.range(1) != 0;
  Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2), c = random_matrix(n, n, 3);
  for (auto _ : state) {
    Matrix r = parallel ? oracle_gemm_parallel(a, b, c) : oracle_gemm(a, b, c);
    benchmark::DoNotOptimize(r.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_OracleGemm)->ArgsProduct({{100, 256}, {0, 1}})->ArgNames({"n", "parallel"});

}  // namespace

BENCHMARK_MAIN();
