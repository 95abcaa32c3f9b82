#include <benchmark/benchmark.h>

#include <cmath>

#include "corpusforge/prng.hpp"
#include "corpusforge/segment.hpp"

using namespace corpusforge;

namespace {

// Speech with sparse dips and short pauses, 10 ms hop.
segment::VadTrace trace(double seconds) {
  Xoshiro256 rng(9);
  segment::VadTrace t;
  t.frame_hop_s = 0.01;
  t.audio_duration_s = seconds;
  t.scores.resize(segment::VadTrace::expected_frames(seconds, t.frame_hop_s));
  bool speech = true;
  std::size_t left = 0;
  for (auto& s : t.scores) {
    if (left == 0) {
      speech = !speech;
      left = static_cast<std::size_t>(speech ? rng.uniform(500, 9000) : rng.uniform(10, 150));
    }
    --left;
    s = speech ? (rng.unit() < 0.01 ? rng.uniform(0.37, 0.5) : rng.uniform(0.55, 1.0)) : rng.uniform(0.0, 0.3);
  }
  return t;
}

void BM_SegmentAudio(benchmark::State& state) {
  const auto t = trace(static_cast<double>(state.range(0)));
  const segment::SegmenterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(segment::segment_audio(t, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.scores.size()));
}
BENCHMARK(BM_SegmentAudio)->Arg(300)->Arg(3600);

}  // namespace

BENCHMARK_MAIN();
