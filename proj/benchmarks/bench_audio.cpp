#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "corpusforge/wav.hpp"

using namespace corpusforge;

namespace {

void BM_Resample(benchmark::State& state) {
  const int from = static_cast<int>(state.range(0));
  std::vector<double> in(static_cast<std::size_t>(from) * 10);
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = std::sin(2.0 * std::numbers::pi * 440.0 * i / from);
  for (auto _ : state) benchmark::DoNotOptimize(audio::resample(in, from, audio::kTargetSampleRate));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.size()));
}
BENCHMARK(BM_Resample)->Arg(44100)->Arg(48000)->Arg(22050)->Unit(benchmark::kMillisecond);

void BM_DecodeWav(benchmark::State& state) {
  std::vector<std::int16_t> pcm(44100 * 2 * 10, 1234);
  const auto bytes = audio::encode_wav_s16(pcm, 44100, 2);
  for (auto _ : state) benchmark::DoNotOptimize(audio::decode_wav(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_DecodeWav)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
