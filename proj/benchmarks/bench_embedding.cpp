// Tokenizer and local-embedder throughput on code of increasing length.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "ragxlate/embedding.hpp"
#include "ragxlate/tokenizer.hpp"

namespace {

std::string code_of(int atoms) {
  static const std::vector<std::string> kAtoms = {
      "do",  "i",  "=", "1", "n", "a", "(", ")", "b", "end",
      "sum", "+",  "*", "x", "y", "call", "foo", ",", "2.5", "\n"};
  std::mt19937 rng(17);
  std::uniform_int_distribution<std::size_t> pick(0, kAtoms.size() - 1);
  std::string out;
  for (int i = 0; i < atoms; ++i) {
    if (!out.empty()) out += ' ';
    out += kAtoms[pick(rng)];
  }
  return out;
}

void BM_Tokenize(benchmark::State& state) {
  const std::string code = code_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ragxlate::tokenize(code));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(code.size()));
}
BENCHMARK(BM_Tokenize)->Range(64, 8192);

void BM_LocalEmbed(benchmark::State& state) {
  ragxlate::EmbeddingBackendConfig cfg;
  cfg.dim = static_cast<int>(state.range(1));
  cfg.max_tokens = 1 << 20;  // no truncation; measure the full input
  ragxlate::LocalEmbedder embedder(cfg);
  const std::string code = code_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(code));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(code.size()));
}
BENCHMARK(BM_LocalEmbed)
    ->ArgsProduct({benchmark::CreateRange(64, 4096, 8),
                   benchmark::CreateRange(64, 512, 8)});

}  // namespace

BENCHMARK_MAIN();
