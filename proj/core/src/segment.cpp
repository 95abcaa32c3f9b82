#include "corpusforge/segment.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <tuple>

#include "corpusforge/error.hpp"
#include "corpusforge/io.hpp"
#include "jsonl.hpp"

namespace corpusforge::segment {

std::size_t VadTrace::expected_frames(double audio_duration_s, double frame_hop_s) {
  const double ratio = audio_duration_s / frame_hop_s;
  const double nearest = std::round(ratio);
  // 2.0 / 0.01 evaluates to 200.00000000000003; treat that as exactly 200.
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

void VadTrace::validate() const {
  require(frame_hop_s > 0.0 && std::isfinite(frame_hop_s), "frame_hop_s must be positive");
  require(audio_duration_s >= 0.0 && std::isfinite(audio_duration_s), "audio_duration_s must be nonnegative");
  require(scores.size() == expected_frames(audio_duration_s, frame_hop_s),
          "trace has " + std::to_string(scores.size()) + " scores, expected " +
              std::to_string(expected_frames(audio_duration_s, frame_hop_s)));
  for (double s : scores) require(s >= 0.0 && s <= 1.0, "VAD score outside [0, 1]");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Passthrough: return "PASSTHROUGH";
    case Provenance::Cut: return "CUT";
    case Provenance::Merged: return "MERGED";
  }
  return "PASSTHROUGH";
}

Provenance provenance_from_string(std::string_view text) {
  if (text == "PASSTHROUGH") return Provenance::Passthrough;
  if (text == "CUT") return Provenance::Cut;
  if (text == "MERGED") return Provenance::Merged;
  raise(ErrorCode::Io, "unknown provenance '" + std::string(text) + "'");
}

void SegmenterConfig::validate() const {
  require(t0_s > 0.0, "t0_s must be positive");
  require(onset_threshold >= 0.0 && onset_threshold <= 1.0, "onset_threshold outside [0, 1]");
  require(offset_threshold >= 0.0 && offset_threshold <= 1.0, "offset_threshold outside [0, 1]");
  require(offset_threshold <= onset_threshold, "offset_threshold must not exceed onset_threshold");
  require(min_region_s >= 0.0, "min_region_s must be nonnegative");
  require(max_merge_gap_s >= 0.0, "max_merge_gap_s must be nonnegative");
  require(min_cut_piece_s > 0.0 && min_cut_piece_s < t0_s, "min_cut_piece_s must lie in (0, t0_s)");
}

std::vector<ActiveRegion> binarize(const VadTrace& trace, const SegmenterConfig& cfg) {
  trace.validate();
  cfg.validate();
  std::vector<ActiveRegion> regions;
  auto emit = [&](double start, double end) {
    if (end - start >= cfg.min_region_s && end > start) regions.push_back({start, end});
  };
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < trace.scores.size(); ++i) {
    const double s = trace.scores[i];
    if (!open && s >= cfg.onset_threshold) {
      open = i;
    } else if (open && s < cfg.offset_threshold) {
      emit(trace.frame_time(*open), trace.frame_time(i));
      open.reset();
    }
  }
  if (open) emit(trace.frame_time(*open), trace.audio_duration_s);
  return regions;
}

namespace {

void bisect(double start, double end, const VadTrace& trace, const SegmenterConfig& cfg,
            std::vector<SegmentSpan>& out) {
  if (end - start <= cfg.t0_s) {
    out.push_back({start, end, Provenance::Cut});
    return;
  }
  const double hop = trace.frame_hop_s;
  const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(start / hop)));
  const auto last = std::min(trace.scores.size(), static_cast<std::size_t>(std::ceil(end / hop)) + 1);

  std::optional<std::tuple<double, double, std::size_t>> best;
  for (std::size_t c = first; c < last; ++c) {
    const double t = trace.frame_time(c);
    if (t - start < cfg.min_cut_piece_s || end - t < cfg.min_cut_piece_s) continue;
    const std::tuple key{trace.scores[c], std::abs(2.0 * t - (start + end)), c};
    if (!best || key < *best) best = key;
  }
  if (!best)
    raise(ErrorCode::UncuttableRegion, "piece [" + std::to_string(start) + ", " + std::to_string(end) +
                                           "] exceeds t0 but has no admissible cut frame");
  const double cut = trace.frame_time(std::get<2>(*best));
  bisect(start, cut, trace, cfg, out);
  bisect(cut, end, trace, cfg, out);
}

}  // namespace

std::vector<SegmentSpan> cut_region(const ActiveRegion& region, const VadTrace& trace, const SegmenterConfig& cfg) {
  require(region.start_s >= 0.0 && region.start_s < region.end_s, "region must have start < end");
  if (region.duration() <= cfg.t0_s) return {{region.start_s, region.end_s, Provenance::Passthrough}};
  std::vector<SegmentSpan> out;
  bisect(region.start_s, region.end_s, trace, cfg, out);
  return out;
}

std::vector<SegmentSpan> merge_spans(const std::vector<SegmentSpan>& spans, const SegmenterConfig& cfg) {
  std::vector<SegmentSpan> out;
  if (spans.empty()) return out;
  SegmentSpan current = spans.front();
  for (std::size_t i = 1; i < spans.size(); ++i) {
    const auto& next = spans[i];
    require(next.start_s >= current.end_s, "spans must be sorted and non-overlapping");
    const double gap = next.start_s - current.end_s;
    if (gap <= cfg.max_merge_gap_s && next.end_s - current.start_s <= cfg.t0_s) {
      current.end_s = next.end_s;
      current.provenance = Provenance::Merged;
    } else {
      out.push_back(current);
      current = next;
    }
  }
  out.push_back(current);
  return out;
}

std::vector<SegmentSpan> segment_audio(const VadTrace& trace, const SegmenterConfig& cfg) {
  std::vector<SegmentSpan> pieces;
  for (const auto& region : binarize(trace, cfg)) {
    auto cut = cut_region(region, trace, cfg);
    pieces.insert(pieces.end(), cut.begin(), cut.end());
  }
  return merge_spans(pieces, cfg);
}

// ---------------------------------------------------------------------------
// Interchange

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) raise(ErrorCode::Io, "bad number in " + what);
  return v;
}

}  // namespace

std::string format_trace(const VadTrace& trace) {
  std::string out = shortest(trace.frame_hop_s) + " " + shortest(trace.audio_duration_s) + "\n";
  for (double s : trace.scores) {
    out += shortest(s);
    out += '\n';
  }
  return out;
}

VadTrace parse_trace(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) raise(ErrorCode::Io, "empty VAD trace");
  const auto& header = lines.front();
  const auto sp = header.find_first_of(" \t");
  if (sp == std::string::npos) raise(ErrorCode::Io, "VAD trace header needs frame_hop_s and audio_duration_s");
  VadTrace trace;
  trace.frame_hop_s = parse_double(std::string_view(header).substr(0, sp), "trace header");
  trace.audio_duration_s = parse_double(std::string_view(header).substr(sp + 1), "trace header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    trace.scores.push_back(parse_double(lines[i], "trace line " + std::to_string(i + 1)));
  }
  trace.validate();
  return trace;
}

VadTrace read_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

void write_trace(const std::filesystem::path& path, const VadTrace& trace) {
  write_file_atomic(path, format_trace(trace));
}

void write_span_records(const std::filesystem::path& path, const std::vector<SpanRecord>& records) {
  std::vector<jsonl::Json> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    jsonl::Json j;
    j["episode_id"] = r.episode_id;
    j["start_s"] = r.span.start_s;
    j["end_s"] = r.span.end_s;
    j["provenance"] = std::string(to_string(r.span.provenance));
    out.push_back(std::move(j));
  }
  jsonl::write(path, out);
}

std::vector<SpanRecord> read_span_records(const std::filesystem::path& path) {
  std::vector<SpanRecord> out;
  const auto ctx = path.string();
  for (const auto& j : jsonl::read(path)) {
    SpanRecord r;
    r.episode_id = jsonl::get<std::string>(j, "episode_id", ctx);
    r.span.start_s = jsonl::get<double>(j, "start_s", ctx);
    r.span.end_s = jsonl::get<double>(j, "end_s", ctx);
    r.span.provenance = provenance_from_string(jsonl::get<std::string>(j, "provenance", ctx));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace corpusforge::segment
