#include <benchmark/benchmark.h>

#include "corpusforge/corpus.hpp"
#include "corpusforge/filter.hpp"
#include "corpusforge/prng.hpp"

using namespace corpusforge;

namespace {

std::vector<TranscribedSegment> segments(int categories, double hours) {
  Xoshiro256 rng(5);
  std::vector<TranscribedSegment> out;
  for (int c = 0; c < categories; ++c) {
    double have = 0.0;
    for (int e = 0; have < hours * 3600.0; ++e) {
      double t = 0.0;
      const double len = rng.uniform(600.0, 2400.0);
      while (t < len) {
        const double d = rng.uniform(2.0, 30.0);
        TranscribedSegment s;
        s.episode_id = "c" + std::to_string(c) + "-e" + std::to_string(e);
        s.category = "cat" + std::to_string(c);
        s.span = {t, t + d, segment::Provenance::Passthrough};
        s.transcript = rng.unit() < 0.05 ? "ακολουθήστε με στο Instagram" : "καλημέρα σε όλους τους ακροατές";
        out.push_back(std::move(s));
        have += d;
        t += d + 0.5;
      }
    }
  }
  return out;
}

void BM_BuildStratified(benchmark::State& state) {
  const auto segs = segments(16, 12.0);
  std::vector<std::string> cats;
  for (int c = 0; c < 16; ++c) cats.push_back("cat" + std::to_string(c));
  for (auto _ : state) benchmark::DoNotOptimize(corpus::build_stratified(segs, cats, 10.0, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(segs.size()));
}
BENCHMARK(BM_BuildStratified)->Unit(benchmark::kMillisecond);

void BM_ApplyFilters(benchmark::State& state) {
  const auto segs = segments(2, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(filter::apply_filters(segs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(segs.size()));
}
BENCHMARK(BM_ApplyFilters)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
