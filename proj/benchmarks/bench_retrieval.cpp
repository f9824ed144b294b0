// Brute-force retrieval cost as the store grows: single top-k queries and the
// all-pairs similarity matrix.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "ragxlate/embedding.hpp"
#include "ragxlate/vectorstore.hpp"

namespace {

constexpr int kDim = 64;

ragxlate::VectorStore make_store(int n) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<ragxlate::VectorRecord> recs;
  recs.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(kDim);
    for (double& x : v) x = coord(rng);
    v[0] += 2.0;  // keep norms well away from zero
    ragxlate::VectorRecord rec;
    rec.pair_id = "p" + std::to_string(i);
    rec.embedding = ragxlate::EmbeddingVector{std::move(v), "bench", kDim};
    recs.push_back(std::move(rec));
  }
  ragxlate::VectorStore store;
  store.upsert(recs);
  return store;
}

void BM_TopKQuery(benchmark::State& state) {
  const ragxlate::VectorStore store = make_store(static_cast<int>(state.range(0)));
  std::vector<double> qv(kDim, 0.25);
  ragxlate::RetrievalQuery q;
  q.query_embedding = ragxlate::EmbeddingVector{std::move(qv), "bench", kDim};
  q.k = 5;
  for (auto _ : state) benchmark::DoNotOptimize(store.query(q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TopKQuery)->Range(64, 8192);

void BM_SimilarityMatrix(benchmark::State& state) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<ragxlate::EmbeddingVector> vectors;
  for (int i = 0; i < state.range(0); ++i) {
    std::vector<double> v(kDim);
    for (double& x : v) x = coord(rng);
    v[0] += 2.0;
    vectors.push_back(ragxlate::EmbeddingVector{std::move(v), "bench", kDim});
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(ragxlate::similarity_matrix(vectors));
}
BENCHMARK(BM_SimilarityMatrix)->Range(8, 256);

}  // namespace

BENCHMARK_MAIN();
