#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "corpusforge/prng.hpp"
#include "corpusforge/wav.hpp"

namespace cftest {

/// Bursty noise-modulated tones, roughly speech-shaped in level. Interleaved
/// channels carry slightly different content.
inline std::string speechlike_wav(double seconds, int rate, int channels, std::uint64_t seed) {
  corpusforge::Xoshiro256 rng(seed);
  const auto frames = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<std::int16_t> pcm(frames * static_cast<std::size_t>(channels));
  double envelope = 0.0;
  for (std::size_t i = 0; i < frames; ++i) {
    if (i % static_cast<std::size_t>(rate / 10) == 0) envelope = rng.unit() < 0.8 ? rng.uniform(0.2, 0.6) : 0.0;
    const double t = static_cast<double>(i) / rate;
    for (int c = 0; c < channels; ++c) {
      const double tone = std::sin(2.0 * M_PI * (180.0 + 40.0 * c) * t) + 0.3 * std::sin(2.0 * M_PI * 900.0 * t);
      const double x = envelope * (0.7 * tone + 0.3 * rng.uniform(-1.0, 1.0)) * 0.5;
      pcm[i * channels + c] = static_cast<std::int16_t>(std::lround(x * 32767.0));
    }
  }
  return corpusforge::audio::encode_wav_s16(pcm, rate, channels);
}

inline std::string silent_wav(double seconds, int rate = 16000) {
  std::vector<std::int16_t> pcm(static_cast<std::size_t>(std::llround(seconds * rate)), 0);
  return corpusforge::audio::encode_wav_s16(pcm, rate, 1);
}

}  // namespace cftest
