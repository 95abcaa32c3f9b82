#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace corpusforge::segment {

/// Frame-level speech probabilities. Frame i covers [i*hop, (i+1)*hop).
struct VadTrace {
  std::vector<double> scores;
  double frame_hop_s = 0.01;
  double audio_duration_s = 0.0;

  /// ceil(audio_duration_s / frame_hop_s), robust to representation error.
  static std::size_t expected_frames(double audio_duration_s, double frame_hop_s);
  /// Throws PreconditionViolation when an invariant fails.
  void validate() const;
  double frame_time(std::size_t frame) const { return static_cast<double>(frame) * frame_hop_s; }
  bool operator==(const VadTrace&) const = default;
};

struct ActiveRegion {
  double start_s = 0.0;
  double end_s = 0.0;

  double duration() const { return end_s - start_s; }
  bool operator==(const ActiveRegion&) const = default;
};

enum class Provenance { Passthrough, Cut, Merged };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view text);

struct SegmentSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  Provenance provenance = Provenance::Passthrough;

  double duration() const { return end_s - start_s; }
  bool operator==(const SegmentSpan&) const = default;
};

struct SegmenterConfig {
  double t0_s = 30.0;
  double onset_threshold = 0.5;
  double offset_threshold = 0.363;
  double min_region_s = 0.25;
  double max_merge_gap_s = 0.5;
  double min_cut_piece_s = 1.0;

  void validate() const;
};

/// Hysteresis thresholding: a region opens at the first frame with
/// score >= onset and closes at the first later frame with score < offset.
/// Regions shorter than min_region_s are dropped.
std::vector<ActiveRegion> binarize(const VadTrace& trace, const SegmenterConfig& cfg);

/// Splits a region longer than t0 by recursive bisection. A cut at frame c
/// splits piece [a, b) at t = c*hop; c is admissible when t - a and b - t are
/// both >= min_cut_piece_s. The chosen frame minimises, lexicographically,
/// (score[c], |2t - (a + b)|, c). Throws UncuttableRegion when an over-long
/// piece has no admissible frame.
std::vector<SegmentSpan> cut_region(const ActiveRegion& region, const VadTrace& trace, const SegmenterConfig& cfg);

/// Greedy left-to-right merge of neighbours whose gap is <= max_merge_gap_s
/// while the merged span stays <= t0. Input must be sorted and non-overlapping.
std::vector<SegmentSpan> merge_spans(const std::vector<SegmentSpan>& spans, const SegmenterConfig& cfg);

/// binarize, cut every region, merge.
std::vector<SegmentSpan> segment_audio(const VadTrace& trace, const SegmenterConfig& cfg);

// Trace interchange: first line "<frame_hop_s> <audio_duration_s>", then one
// score per line.
std::string format_trace(const VadTrace& trace);
VadTrace parse_trace(std::string_view text);
VadTrace read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const VadTrace& trace);

struct SpanRecord {
  std::string episode_id;
  SegmentSpan span;

  bool operator==(const SpanRecord&) const = default;
};

void write_span_records(const std::filesystem::path& path, const std::vector<SpanRecord>& records);
std::vector<SpanRecord> read_span_records(const std::filesystem::path& path);

}  // namespace corpusforge::segment
