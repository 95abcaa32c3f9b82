#include <benchmark/benchmark.h>

#include "corpusforge/eval.hpp"
#include "corpusforge/prng.hpp"

using namespace corpusforge;

namespace {

eval::NormalizedText random_text(Xoshiro256& rng, std::size_t n, std::size_t vocab) {
  eval::NormalizedText t;
  for (std::size_t i = 0; i < n; ++i) t.tokens.push_back("λ" + std::to_string(rng.below(vocab)));
  return t;
}

void BM_Wer(benchmark::State& state) {
  Xoshiro256 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ref = random_text(rng, n, 50), hyp = random_text(rng, n, 50);
  for (auto _ : state) benchmark::DoNotOptimize(eval::wer(ref, hyp));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Wer)->Arg(12)->Arg(60)->Arg(300);

void BM_Normalize(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < 40; ++i) text += "Καλημέρα, κόσμε! Ο καιρός σήμερα (2023) είναι «καλός». ";
  for (auto _ : state) benchmark::DoNotOptimize(eval::normalize(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Normalize);

}  // namespace

BENCHMARK_MAIN();
