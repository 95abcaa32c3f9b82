#include "corpusforge/filter.hpp"

#include <algorithm>
#include <cmath>

#include "corpusforge/error.hpp"
#include "corpusforge/text.hpp"
#include "jsonl.hpp"

namespace corpusforge::filter {
namespace {

bool blank(std::string_view transcript) { return text::split_whitespace(transcript).empty(); }

std::size_t longest_latin_run(std::string_view token) {
  std::size_t best = 0, run = 0;
  for (char32_t cp : text::to_utf32(token)) {
    run = text::is_latin_letter(cp) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

template <typename Pred>
Partition split_by(const std::vector<TranscribedSegment>& segments, Pred drop) {
  Partition p;
  for (const auto& s : segments) (drop(s) ? p.dropped : p.kept).push_back(s);
  return p;
}

}  // namespace

bool FilterReport::consistent(const std::vector<TranscribedSegment>& input,
                              const std::vector<TranscribedSegment>& kept) const {
  if (input_count != kept_count + dropped_hallucination + dropped_codeswitch + dropped_empty) return false;
  if (input_count != input.size() || kept_count != kept.size()) return false;
  return std::abs(input_hours - total_seconds(input) / 3600.0) <= 1e-6 &&
         std::abs(kept_hours - total_seconds(kept) / 3600.0) <= 1e-6;
}

bool contains_pattern(std::string_view transcript, const std::vector<std::string>& patterns) {
  const auto hay = text::nfc(transcript);
  for (const auto& p : patterns) {
    const auto needle = text::nfc(p);
    if (!needle.empty() && hay.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::size_t boundary_latin_run(std::string_view transcript, std::size_t boundary_window_words) {
  const auto tokens = text::split_whitespace(transcript);
  const auto n = tokens.size();
  const auto w = std::min(boundary_window_words, n);
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i < w || i >= n - w) best = std::max(best, longest_latin_run(tokens[i]));
  return best;
}

bool is_codeswitched(std::string_view transcript, const CodeSwitchPolicy& policy) {
  return boundary_latin_run(transcript, policy.boundary_window_words) >= policy.latin_run_min_chars;
}

Partition filter_hallucinations(const std::vector<TranscribedSegment>& segments, const std::vector<std::string>& patterns) {
  require(!patterns.empty(), "hallucination pattern list is empty");
  return split_by(segments, [&](const auto& s) { return contains_pattern(s.transcript, patterns); });
}

Partition filter_codeswitch(const std::vector<TranscribedSegment>& segments, const CodeSwitchPolicy& policy) {
  require(policy.latin_run_min_chars > 0, "latin_run_min_chars must be positive");
  return split_by(segments, [&](const auto& s) { return is_codeswitched(s.transcript, policy); });
}

FilterResult apply_filters(const std::vector<TranscribedSegment>& segments, const FilterConfig& config) {
  FilterResult out;
  auto& r = out.report;
  r.input_count = segments.size();
  r.input_hours = total_seconds(segments) / 3600.0;

  auto h = filter_hallucinations(segments, config.hallucination_patterns);
  r.dropped_hallucination = h.dropped.size();
  auto c = filter_codeswitch(h.kept, config.codeswitch);
  r.dropped_codeswitch = c.dropped.size();
  auto e = split_by(c.kept, [](const auto& s) { return blank(s.transcript); });
  r.dropped_empty = e.dropped.size();

  out.kept = std::move(e.kept);
  std::stable_sort(out.kept.begin(), out.kept.end(), segment_order);
  r.kept_count = out.kept.size();
  r.kept_hours = total_seconds(out.kept) / 3600.0;
  return out;
}

void write_report(const std::filesystem::path& path, const FilterReport& r) {
  jsonl::Json j;
  j["input_count"] = r.input_count;
  j["kept_count"] = r.kept_count;
  j["dropped_hallucination"] = r.dropped_hallucination;
  j["dropped_codeswitch"] = r.dropped_codeswitch;
  j["dropped_empty"] = r.dropped_empty;
  j["input_hours"] = r.input_hours;
  j["kept_hours"] = r.kept_hours;
  j["kept_fraction"] = r.input_hours > 0.0 ? r.kept_hours / r.input_hours : 0.0;
  jsonl::write(path, {j});
}

FilterReport read_report(const std::filesystem::path& path) {
  const auto records = jsonl::read(path);
  if (records.size() != 1) raise(ErrorCode::Io, path.string() + ": expected one report record");
  const auto& j = records.front();
  const auto ctx = path.string();
  FilterReport r;
  r.input_count = jsonl::get<std::size_t>(j, "input_count", ctx);
  r.kept_count = jsonl::get<std::size_t>(j, "kept_count", ctx);
  r.dropped_hallucination = jsonl::get<std::size_t>(j, "dropped_hallucination", ctx);
  r.dropped_codeswitch = jsonl::get<std::size_t>(j, "dropped_codeswitch", ctx);
  r.dropped_empty = jsonl::get<std::size_t>(j, "dropped_empty", ctx);
  r.input_hours = jsonl::get<double>(j, "input_hours", ctx);
  r.kept_hours = jsonl::get<double>(j, "kept_hours", ctx);
  return r;
}

}  // namespace corpusforge::filter
