// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include "creweight/channel.hpp"
#include "creweight/codebook.hpp"
#include "creweight/detector.hpp"
#include "creweight/generator.hpp"

using namespace creweight;

namespace {

const SyntheticCodebook& codebook() {
  static const auto cb = synthesize_codebook(1, 4096, 16, 64, 10.0, 1.0);
  return cb;
}

void BM_KMeansParallel(benchmark::State& state) {
  const KMeansOptions opts{static_cast<std::uint32_t>(state.range(0)), 3, 20, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_fit(codebook().table, opts));
}

void BM_KMeansSerial(benchmark::State& state) {
  const KMeansOptions opts{static_cast<std::uint32_t>(state.range(0)), 3, 20, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_fit_serial(codebook().table, opts));
}

void BM_ReplacementParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ReplacementSampler(codebook().table, 0.5));
}

void BM_ReplacementSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ReplacementSampler::build_serial(codebook().table, 0.5));
}

struct DetectFixture {
  Clustering clustering = kmeans_cluster(codebook().table, 64, 5, 30);
  SecretKey key = SecretKey::from_seed(9);
  std::vector<std::vector<TokenId>> seqs;
  DetectFixture() {
    Rng rng(4);
    for (int s = 0; s < 64; ++s) {
      std::vector<TokenId> v(1024);
      for (auto& t : v) t = static_cast<TokenId>(uniform_below(rng, 4096));
      seqs.push_back(std::move(v));
    }
  }
};

const DetectFixture& detect_fixture() {
  static const DetectFixture f;
  return f;
}

void BM_DetectBatchParallel(benchmark::State& state) {
  const auto& f = detect_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(detect_batch(f.seqs, f.key, f.clustering, {}));
}

void BM_DetectBatchSerial(benchmark::State& state) {
  const auto& f = detect_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(detect_batch_serial(f.seqs, f.key, f.clustering, {}));
}

}  // namespace

BENCHMARK(BM_KMeansParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeansSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplacementParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplacementSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectBatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectBatchSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
