#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/records.hpp"

namespace corpusforge::filter {

inline constexpr std::string_view kDefaultHallucinationPattern = "Υπότιτλοι AUTHORWAVE";

struct CodeSwitchPolicy {
  std::size_t latin_run_min_chars = 4;
  std::size_t boundary_window_words = 5;
};

struct FilterConfig {
  std::vector<std::string> hallucination_patterns{std::string(kDefaultHallucinationPattern)};
  CodeSwitchPolicy codeswitch;
};

struct Partition {
  std::vector<TranscribedSegment> kept;
  std::vector<TranscribedSegment> dropped;
};

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t kept_count = 0;
  std::size_t dropped_hallucination = 0;
  std::size_t dropped_codeswitch = 0;
  std::size_t dropped_empty = 0;
  double input_hours = 0.0;
  double kept_hours = 0.0;

  /// Count identity, and hours against the given segment lists (1e-6 h).
  bool consistent(const std::vector<TranscribedSegment>& input, const std::vector<TranscribedSegment>& kept) const;
  bool operator==(const FilterReport&) const = default;
};

/// Substring match after NFC on both sides; case-sensitive.
bool contains_pattern(std::string_view transcript, const std::vector<std::string>& patterns);

/// Longest maximal run of Latin-script letters inside the first or last
/// boundary_window_words whitespace tokens.
std::size_t boundary_latin_run(std::string_view transcript, std::size_t boundary_window_words);
bool is_codeswitched(std::string_view transcript, const CodeSwitchPolicy& policy);

/// patterns must be non-empty.
Partition filter_hallucinations(const std::vector<TranscribedSegment>& segments, const std::vector<std::string>& patterns);
Partition filter_codeswitch(const std::vector<TranscribedSegment>& segments, const CodeSwitchPolicy& policy);

struct FilterResult {
  std::vector<TranscribedSegment> kept;  // sorted by (episode_id, start_s)
  FilterReport report;
};

/// Hallucination filter, then code-switch filter, then blank transcripts.
FilterResult apply_filters(const std::vector<TranscribedSegment>& segments, const FilterConfig& config = {});

void write_report(const std::filesystem::path& path, const FilterReport& report);
FilterReport read_report(const std::filesystem::path& path);

}  // namespace corpusforge::filter
