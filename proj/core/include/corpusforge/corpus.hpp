#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpusforge/records.hpp"

namespace corpusforge::corpus {

enum class SplitKind { Train, Validation, Test };

std::string_view to_string(SplitKind kind);
SplitKind split_kind_from_string(std::string_view text);

struct SplitSpec {
  std::string name;
  double per_category_budget_s = 0.0;
  SplitKind kind = SplitKind::Train;

  void validate() const;
  bool operator==(const SplitSpec&) const = default;
};

struct SegmentRef {
  std::string episode_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string transcript_ref;  // "<episode_id>:<start_ms>-<end_ms>"
  std::string transcript;
  std::string category;

  double duration() const { return end_s - start_s; }
  bool operator==(const SegmentRef&) const = default;
};

std::string make_transcript_ref(std::string_view episode_id, double start_s, double end_s);
SegmentRef to_ref(const TranscribedSegment& s);

inline constexpr std::string_view kPoolSplit = "all";
inline constexpr std::string_view kTrainSplit = "train";
inline constexpr std::string_view kValidationSplit = "validation";
inline constexpr std::string_view kTestSplit = "test";

using SplitCategory = std::pair<std::string, std::string>;

struct CorpusManifest {
  std::string corpus_name;
  std::map<std::string, std::vector<SegmentRef>> splits;  // each sorted by (category, episode_id, start_s)
  std::map<SplitCategory, double> per_category_actual_s;
  std::uint64_t sampling_seed = 0;
  std::optional<std::string> parent_corpus;
  std::vector<SplitSpec> budgets;
  std::string prng;
  bool nested = false;

  /// Fills per_category_actual_s from the segment lists.
  void recompute();
  /// Splits disjoint and per_category_actual_s matches recomputation.
  bool consistent() const;
  bool operator==(const CorpusManifest&) const = default;
};

/// Per category: episodes are shuffled (seeded) and whole episodes added until
/// the category total first reaches the budget. Single split "all".
/// Throws InsufficientCategoryData.
CorpusManifest build_stratified(const std::vector<TranscribedSegment>& segments,
                                const std::vector<std::string>& categories, double hours_per_category,
                                std::uint64_t seed, std::string corpus_name = {});

/// Carves test, then validation (skipped when val_s_per_cat is 0), at episode
/// granularity; everything else becomes train.
CorpusManifest carve_splits(const CorpusManifest& manifest, double test_s_per_cat, double val_s_per_cat,
                            std::uint64_t seed);

/// Budgets strictly decreasing. Each subset is sampled from the previous one
/// (the first from `train_split` of `manifest`) and holds a single train split.
std::vector<CorpusManifest> nest_subsets(const CorpusManifest& manifest, const std::vector<double>& budgets_h,
                                         std::uint64_t seed, std::string_view train_split = kTrainSplit);

struct StatsRow {
  std::string split;
  std::string category;
  std::size_t segments = 0;
  std::size_t episodes = 0;
  double seconds = 0.0;

  double hours() const { return seconds / 3600.0; }
  bool operator==(const StatsRow&) const = default;
};

std::vector<StatsRow> manifest_stats(const CorpusManifest& manifest);
std::string format_stats(const std::vector<StatsRow>& rows);

/// "GPC-50", "GPC-0.5"
std::string corpus_label(double hours);

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);
CorpusManifest read_manifest(const std::filesystem::path& path);

}  // namespace corpusforge::corpus
