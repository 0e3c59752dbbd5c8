#include <benchmark/benchmark.h>

#include <hardylab/lab.hpp>

namespace lab = hardylab::lab;
using namespace hardylab;

namespace {

FramePtr bench_frame(int l, int m, int N) {
  std::vector<cplx> zs{cplx(0, 0)};
  for (int i = 1; i < l; ++i) zs.push_back(cplx(0.1 * i, 0.25 - 0.05 * i));
  return frame_build(BlaschkeProduct(zs), m, N, 200);
}

void BM_frame_build(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bench_frame(l, 2, 8));
}
BENCHMARK(BM_frame_build)->Arg(1)->Arg(3);

void BM_orthonormalize(benchmark::State& state) {
  const auto fr = bench_frame(3, 3, 8);
  lab::Rng rng(5);
  std::vector<Vec> vs;
  for (int i = 0; i < 24; ++i) vs.push_back(rng.cvec(fr->dim()));
  for (auto _ : state)
    benchmark::DoNotOptimize(orthonormalize(fr, vs).dim());
}
BENCHMARK(BM_orthonormalize);

void BM_generate(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(lab::generate(seed++, "thm32", {}).payload.size());
}
BENCHMARK(BM_generate);

void BM_decompose(benchmark::State& state) {
  const auto sc = lab::generate(3, "thm32", {});
  for (auto _ : state) {
    const auto rec = lab::run(sc, 1e-8);
    benchmark::DoNotOptimize(rec.status);
  }
}
BENCHMARK(BM_decompose);

void BM_defect_decompose(benchmark::State& state) {
  const auto sc = lab::generate(3, "thm44", {});
  for (auto _ : state) {
    const auto rec = lab::run(sc, 1e-8);
    benchmark::DoNotOptimize(rec.status);
  }
}
BENCHMARK(BM_defect_decompose);

}  // namespace

BENCHMARK_MAIN();
