// Serial versus OpenMP exact scan over synthetic law rows.
//   lexfuse_scan_bench --benchmark_filter=Scan

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "lexfuse/fusion.hpp"

namespace {

using namespace lexfuse;

struct Workload {
  LawMatrix laws;
  KeywordEmbeddings keywords;
  EmbeddingVector query{std::vector<double>{1.0}};
};

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

Workload make_workload(std::size_t rows, std::size_t dim, std::size_t keywords) {
  std::mt19937_64 rng(rows * 31 + dim);
  auto values = gaussian(rng, rows * dim);
  std::vector<double> norms(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    norms[j] = l2_norm(std::span<const double>(values.data() + j * dim, dim));
  }
  Workload w{LawMatrix(dim, std::move(values), std::move(norms), 0), {}, EmbeddingVector(gaussian(rng, dim))};
  for (std::size_t i = 0; i < keywords; ++i) {
    w.keywords.vectors.emplace_back(gaussian(rng, dim));
    w.keywords.source_keywords.push_back("k" + std::to_string(i));
  }
  return w;
}

const Workload& workload(std::size_t rows) {
  static const Workload small = make_workload(10000, 256, 4);
  static const Workload large = make_workload(100000, 256, 4);
  return rows == 10000 ? small : large;
}

void ScanSerial(benchmark::State& state) {
  const auto& w = workload(static_cast<std::size_t>(state.range(0)));
  RetrievalConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(score_corpus(w.keywords, w.query, w.laws, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void ScanParallel(benchmark::State& state) {
  const auto& w = workload(static_cast<std::size_t>(state.range(0)));
  RetrievalConfig cfg;
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(scan_parallel(w.keywords, w.query, w.laws, cfg, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(ScanSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(ScanParallel)
    ->ArgsProduct({{10000, 100000}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
