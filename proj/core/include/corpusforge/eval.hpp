#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corpusforge::eval {

/// A frozen set of normalization rules; the id is written into every report.
struct NormalizationProfile {
  std::string id = "greek-basic-v1";
  bool fold_final_sigma = true;
  bool strip_marks = true;
};

/// Known profile by id. Throws ConfigInvalid for unknown ids.
NormalizationProfile profile_by_id(std::string_view id);

struct NormalizedText {
  std::vector<std::string> tokens;

  std::string joined() const;
  bool operator==(const NormalizedText&) const = default;
};

/// NFC, lowercase, final sigma folded, combining marks stripped, every
/// non-letter non-digit code point to a space, split.
NormalizedText normalize(std::string_view text, const NormalizationProfile& profile = {});

struct CleaningRules {
  bool remove_event_markers = true;  // "<cough>"-style spans without nested brackets
};

std::string clean_reference(std::string_view text, const CleaningRules& rules = {});

struct WerBreakdown {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_len = 0;
  double wer = 0.0;  // +infinity when undefined

  std::size_t errors() const { return substitutions + deletions + insertions; }
  bool defined() const { return wer != std::numeric_limits<double>::infinity(); }
  bool operator==(const WerBreakdown&) const = default;
};

/// Unit-cost Levenshtein over tokens. Among optimal alignments the backtrace
/// prefers substitution, then insertion, then deletion.
WerBreakdown wer(const NormalizedText& reference, const NormalizedText& hypothesis);

struct ScoredSegment {
  std::string category;
  WerBreakdown breakdown;
};

struct ReportRow {
  std::string dataset;
  std::string model;
  std::string finetune_corpus;  // "-" when not fine-tuned
  double wer_percent = 0.0;
  bool operator==(const ReportRow&) const = default;
};

struct CurvePoint {
  double train_hours = 0.0;
  double wer_percent = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

struct EvalReport {
  std::string profile_id;
  std::vector<ReportRow> rows;
  std::map<std::string, double> per_domain;  // category -> WER percent
  std::vector<CurvePoint> scaling_curve;
  std::size_t segments = 0;
  std::size_t undefined_excluded = 0;
  std::vector<std::string> warnings;
  bool operator==(const EvalReport&) const = default;
};

struct Labels {
  std::string dataset;
  std::string model;
  std::string finetune_corpus = "-";
  std::string profile_id = "greek-basic-v1";
};

/// Pooled counts per domain and overall; undefined rows are excluded with a
/// warning. Produces one row.
EvalReport aggregate(const std::vector<ScoredSegment>& per_segment, const Labels& labels);

struct Baseline {
  std::string label;
  double wer_percent = 0.0;
};

/// Points must have strictly increasing train_hours.
std::vector<CurvePoint> scaling_curve(const std::vector<std::pair<double, EvalReport>>& results);

// ---- emission ----

/// Aligned text table with columns Dataset, Model, Finetuning corpus, WER;
/// a dataset repeated on consecutive rows is printed once.
std::string format_table(const std::vector<ReportRow>& rows);
/// One JSON record per row.
std::string format_rows_jsonl(const std::vector<ReportRow>& rows, std::string_view profile_id);

/// TSV "x y series": one record per (series, category).
struct DomainSeries {
  std::string series;
  std::map<std::string, double> per_domain;
};
std::string format_per_domain(const std::vector<DomainSeries>& series);

/// TSV "x y series baseline": points flagged 0, then an optional baseline
/// record with empty x flagged 1. Empty input gives just the header.
std::string format_scaling_curve(const std::vector<CurvePoint>& points, std::string_view series,
                                 const std::optional<Baseline>& baseline);

std::string format_percent(double wer_percent);

// ---- evaluate stage ----

struct Hypothesis {
  std::string segment_ref;
  std::string text;
  std::string model;
  std::string finetune_corpus;
};

std::vector<Hypothesis> read_hypotheses(const std::filesystem::path& path);

struct EvaluateOptions {
  NormalizationProfile profile;
  CleaningRules cleaning;
  std::string split = "test";
  /// finetune label -> training hours, for the scaling curve.
  std::map<std::string, double> curve_hours;
  std::optional<std::string> baseline_model;
};

struct EvaluateResult {
  std::vector<EvalReport> reports;  // one per (model, finetune) in first-seen order
  std::vector<std::string> warnings;
  std::vector<CurvePoint> curve;
  std::string curve_series;
  std::optional<Baseline> baseline;
};

/// References are the manifest transcripts of `split`. With no hypotheses the
/// references are scored against themselves. A reference segment with no
/// hypothesis for a model counts as an empty hypothesis.
EvaluateResult evaluate(const std::filesystem::path& manifest, const std::vector<Hypothesis>& hyps,
                        const EvaluateOptions& options);

/// Writes report.txt, report.jsonl, per_domain.tsv and scaling_curve.tsv.
void write_outputs(const std::filesystem::path& dir, const EvaluateResult& result);

}  // namespace corpusforge::eval
