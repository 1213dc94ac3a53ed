// Compares the reference, serial and OpenMP similarity kernels and the full
// retrieval step on a synthetic pool.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "sonify/embed_store.hpp"
#include "sonify/kernels.hpp"
#include "sonify/retrieval.hpp"
#include "sonify/rng.hpp"

namespace {

constexpr std::size_t kDim = 512;

std::vector<float> random_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
  sonify::Rng rng(seed);
  std::vector<float> v(n * dim);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

const sonify::EmbeddingMatrix& pool_of(std::size_t n) {
  static std::size_t cached_n = 0;
  static sonify::EmbeddingMatrix cached;
  if (cached_n != n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = "c" + std::to_string(i);
    cached = sonify::EmbeddingMatrix(n, kDim, random_rows(n, kDim, 11), std::move(ids), "bench", true);
    cached_n = n;
  }
  return cached;
}

void BM_DotRowsReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rows = random_rows(n, kDim, 1);
  const auto q = random_rows(1, kDim, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    sonify::kernels::dot_rows_reference(q.data(), rows.data(), n, kDim, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_DotRowsSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rows = random_rows(n, kDim, 1);
  const auto q = random_rows(1, kDim, 2);
  std::vector<float> out(n);
  for (auto _ : state) {
    sonify::kernels::dot_rows_serial(q.data(), rows.data(), n, kDim, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_DotRowsParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  const auto rows = random_rows(n, kDim, 1);
  const auto q = random_rows(1, kDim, 2);
  std::vector<float> out(n);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  for (auto _ : state) {
    sonify::kernels::dot_rows_parallel(q.data(), rows.data(), n, kDim, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  omp_set_num_threads(saved);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_Retrieve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& pool = pool_of(n);
  const auto q = random_rows(1, kDim, 3);
  const sonify::RetrievalConfig cfg;
  const sonify::SoundingConcept sc{"img:vlm:1", "img", "dog", "barking", "vlm"};
  const auto exec = state.range(1) ? sonify::Execution::parallel : sonify::Execution::sequential;
  for (auto _ : state) {
    sonify::Rng rng(5);
    auto m = sonify::get_matched_audio(sc, q, pool, cfg, rng, exec);
    benchmark::DoNotOptimize(m);
  }
}

}  // namespace

BENCHMARK(BM_DotRowsReference)->Arg(10000)->Arg(100000);
BENCHMARK(BM_DotRowsSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_DotRowsParallel)->ArgsProduct({{10000, 100000}, {1, 2, 4, 8}})->UseRealTime();
BENCHMARK(BM_Retrieve)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
