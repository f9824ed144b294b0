// Throughput of the translation metric and its components as snippet size
// grows. Inputs are synthetic but token-mix-realistic, generated with a fixed
// seed so runs are comparable.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "ragxlate/codebleu.hpp"
#include "ragxlate/tokenizer.hpp"

namespace {

std::string snippet(std::mt19937& rng, int atoms) {
  static const std::vector<std::string> kAtoms = {
      "int", "for", "if",  "while", "double", "return", "x", "y", "z",
      "i",   "n",   "sum", "a",     "b",      "c",      "0", "1", "42",
      "2.5", "=",   "==",  "+",     "-",      "*",      "<", "+=", ";",
      ",",   "(",   ")",   "{",     "}",      "[",      "]", "\n"};
  std::uniform_int_distribution<std::size_t> pick(0, kAtoms.size() - 1);
  std::string out;
  for (int i = 0; i < atoms; ++i) {
    if (!out.empty()) out += ' ';
    out += kAtoms[pick(rng)];
  }
  return out;
}

void BM_CodeBleuFull(benchmark::State& state) {
  std::mt19937 rng(7);
  const std::string cand = snippet(rng, static_cast<int>(state.range(0)));
  const std::string ref = snippet(rng, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(ragxlate::codebleu(cand, ref).combined);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CodeBleuFull)->Range(16, 2048);

void BM_NgramMatch(benchmark::State& state) {
  std::mt19937 rng(7);
  const auto cand = ragxlate::tokenize(snippet(rng, static_cast<int>(state.range(0))));
  const auto ref = ragxlate::tokenize(snippet(rng, static_cast<int>(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(ragxlate::ngram_match(cand, ref));
}
BENCHMARK(BM_NgramMatch)->Range(16, 2048);

void BM_ParseStruct(benchmark::State& state) {
  std::mt19937 rng(7);
  const std::string code = snippet(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ragxlate::parse_struct(code));
}
BENCHMARK(BM_ParseStruct)->Range(16, 2048);

void BM_ExtractDataflow(benchmark::State& state) {
  std::mt19937 rng(7);
  const std::string code = snippet(rng, static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(ragxlate::extract_dataflow(code));
}
BENCHMARK(BM_ExtractDataflow)->Range(16, 2048);

}  // namespace

BENCHMARK_MAIN();
