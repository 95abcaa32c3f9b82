#include "corpusforge/records.hpp"

#include <tuple>

#include "jsonl.hpp"

namespace corpusforge {

using jsonl::Json;

bool segment_order(const TranscribedSegment& a, const TranscribedSegment& b) {
  return std::tie(a.episode_id, a.span.start_s, a.span.end_s) < std::tie(b.episode_id, b.span.start_s, b.span.end_s);
}

double total_seconds(const std::vector<TranscribedSegment>& segments) {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.duration();
  return s;
}

void write_segments(const std::filesystem::path& path, const std::vector<TranscribedSegment>& segments) {
  std::vector<Json> out;
  out.reserve(segments.size());
  for (const auto& s : segments) {
    Json j;
    j["episode_id"] = s.episode_id;
    j["category"] = s.category;
    j["start_s"] = s.span.start_s;
    j["end_s"] = s.span.end_s;
    j["provenance"] = std::string(segment::to_string(s.span.provenance));
    j["transcript"] = s.transcript;
    if (s.word_timings) {
      Json words = Json::array();
      for (const auto& w : *s.word_timings)
        words.push_back(Json{{"word", w.word}, {"start_s", w.start_s}, {"end_s", w.end_s}, {"confidence", w.confidence}});
      j["word_timings"] = std::move(words);
    } else {
      j["word_timings"] = nullptr;
    }
    out.push_back(std::move(j));
  }
  jsonl::write(path, out);
}

std::vector<TranscribedSegment> read_segments(const std::filesystem::path& path) {
  std::vector<TranscribedSegment> out;
  const auto ctx = path.string();
  for (const auto& j : jsonl::read(path)) {
    TranscribedSegment s;
    s.episode_id = jsonl::get<std::string>(j, "episode_id", ctx);
    s.category = jsonl::get<std::string>(j, "category", ctx);
    s.span.start_s = jsonl::get<double>(j, "start_s", ctx);
    s.span.end_s = jsonl::get<double>(j, "end_s", ctx);
    s.span.provenance = segment::provenance_from_string(jsonl::get<std::string>(j, "provenance", ctx));
    s.transcript = jsonl::get<std::string>(j, "transcript", ctx);
    if (auto it = j.find("word_timings"); it != j.end() && !it->is_null()) {
      std::vector<backend::WordTiming> words;
      for (const auto& w : *it)
        words.push_back({jsonl::get<std::string>(w, "word", ctx), jsonl::get<double>(w, "start_s", ctx),
                         jsonl::get<double>(w, "end_s", ctx), jsonl::get<double>(w, "confidence", ctx)});
      s.word_timings = std::move(words);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace corpusforge
