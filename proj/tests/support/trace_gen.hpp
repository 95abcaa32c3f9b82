#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "corpusforge/prng.hpp"
#include "corpusforge/segment.hpp"

namespace cftest {

/// Alternating speech and pause runs at a 10 ms hop; long speech runs force
/// cuts, occasional low dips give the cutter somewhere to go.
inline corpusforge::segment::VadTrace random_long_trace(corpusforge::Xoshiro256& rng, double max_duration_s = 300.0) {
  using corpusforge::segment::VadTrace;
  VadTrace t;
  t.frame_hop_s = 0.01;
  t.audio_duration_s = std::round(rng.uniform(1.0, max_duration_s) * 1000.0) / 1000.0;
  const auto n = VadTrace::expected_frames(t.audio_duration_s, t.frame_hop_s);
  bool speech = rng.unit() < 0.7;
  while (t.scores.size() < n) {
    const double run = speech ? rng.uniform(0.1, 120.0) : rng.uniform(0.05, 3.0);
    auto frames = static_cast<std::size_t>(std::ceil(run / t.frame_hop_s));
    for (; frames > 0 && t.scores.size() < n; --frames) {
      double s;
      if (!speech)
        s = rng.uniform(0.0, 0.4);
      else if (const double u = rng.unit(); u < 0.0005)
        s = rng.uniform(0.0, 0.3);  // breaks the region
      else if (u < 0.01)
        s = rng.uniform(0.37, 0.5);  // dip that keeps it open
      else
        s = rng.uniform(0.55, 1.0);
      t.scores.push_back(s);
    }
    speech = !speech;
  }
  return t;
}

/// Short coarse-hop trace with dyadic hop, duration and scores, so the cut
/// arithmetic is exact and ties are common.
inline corpusforge::segment::VadTrace random_coarse_trace(corpusforge::Xoshiro256& rng, std::size_t max_frames = 200) {
  using corpusforge::segment::VadTrace;
  static constexpr double kHops[] = {0.25, 0.375, 0.5};
  VadTrace t;
  t.frame_hop_s = kHops[rng.below(3)];
  const auto n = 1 + rng.below(max_frames);
  t.audio_duration_s = static_cast<double>(n) * t.frame_hop_s - t.frame_hop_s * static_cast<double>(rng.below(4)) / 4.0;
  bool speech = rng.unit() < 0.8;
  while (t.scores.size() < n) {
    auto frames = speech ? 1 + rng.below(150) : 1 + rng.below(6);
    for (; frames > 0 && t.scores.size() < n; --frames) {
      // Multiples of 1/8: speech in [0.5, 1], pauses and dips in [0, 0.375].
      const bool dip = speech && rng.unit() < 0.1;
      t.scores.push_back(speech && !dip ? 0.5 + 0.125 * static_cast<double>(rng.below(5))
                                        : 0.125 * static_cast<double>(rng.below(4)));
    }
    speech = !speech;
  }
  return t;
}

}  // namespace cftest
