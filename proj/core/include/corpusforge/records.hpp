#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corpusforge/backend.hpp"
#include "corpusforge/segment.hpp"

namespace corpusforge {

/// A span of one episode with its pseudo-label. Shared by filter and corpus.
struct TranscribedSegment {
  std::string episode_id;
  segment::SegmentSpan span;
  std::string transcript;
  std::optional<std::vector<backend::WordTiming>> word_timings;
  std::string category;

  double duration() const { return span.duration(); }
  bool operator==(const TranscribedSegment&) const = default;
};

/// Orders by (episode_id, start_s, end_s).
bool segment_order(const TranscribedSegment& a, const TranscribedSegment& b);

double total_seconds(const std::vector<TranscribedSegment>& segments);

void write_segments(const std::filesystem::path& path, const std::vector<TranscribedSegment>& segments);
std::vector<TranscribedSegment> read_segments(const std::filesystem::path& path);

}  // namespace corpusforge
