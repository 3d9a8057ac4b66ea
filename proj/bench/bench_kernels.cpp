// Serial vs OpenMP timings for the three heavy kernels.
// Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <numeric>

#include "qmc/compression.hpp"
#include "qmc/convex_split.hpp"
#include "qmc/extractor.hpp"
#include "scenarios.hpp"

using namespace qmc;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_ConvexSplitPairwise(benchmark::State& st) {
  Rng rng(11);
  const int q = 4, n = 16;
  RVec p = random_distribution(rng, q);
  std::vector<Mat> rho;
  for (int c = 0; c < q; ++c) rho.push_back(random_density(rng, 3));
  const CqSource src = CqSource::from_state(scen::source_state(p, rho), "C");
  std::vector<int> id(q);
  std::iota(id.begin(), id.end(), 0);
  const LiftedFamily fam = lift_marginal(build_family(q, n), id, q);
  for (auto _ : st) benchmark::DoNotOptimize(verify_pairwise(src, fam, exec_of(st)).D);
}
BENCHMARK(BM_ConvexSplitPairwise)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Protocol(benchmark::State& st) {
  Rng rng(12);
  CompressionScenario sc = scen::random_two_qubit(rng, 3, 0.2);
  sc.n = static_cast<int>(st.range(1));
  sc.b = 2;
  ProtocolOptions opt;
  opt.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(run_protocol(sc, opt).final_distance);
}
BENCHMARK(BM_Protocol)->Args({0, 16})->Args({1, 16})->Args({0, 32})->Args({1, 32})->Unit(benchmark::kMillisecond);

void BM_Extractor(benchmark::State& st) {
  Rng rng(13);
  const auto ec = scen::eligible_source(rng, 16, 3, 0.5);
  const ExtractorPlan plan = build_plan(ec.alphabet, ec.k, ec.eps);
  for (auto _ : st) benchmark::DoNotOptimize(run_extractor(ec.source, "C", plan, exec_of(st)).report.D_out);
}
BENCHMARK(BM_Extractor)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
