#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/config.hpp"

namespace corpusforge::pipeline {

namespace fs = std::filesystem;

struct StageReport {
  std::size_t records = 0;
  std::vector<std::string> notes;
};

// Individual stages, shared by the CLI subcommands and run_pipeline.

StageReport crawl_stage(const fs::path& feed_list, const fs::path& catalog_out, const feeds::CrawlPolicy& policy);

/// Writes <out_dir>/raw, <out_dir>/wav and <out_dir>/assets.jsonl.
StageReport fetch_stage(const fs::path& catalog, const fs::path& out_dir, const FetchParams& params);

/// One VAD request per asset; writes <traces_dir>/<episode_id>.trace.
StageReport vad_stage(const fs::path& assets_dir, const fs::path& traces_dir, const BackendParams& backend);

/// Every <episode_id>.trace in traces_dir to span records.
StageReport segment_stage(const fs::path& traces_dir, const fs::path& spans_out, const segment::SegmenterConfig& cfg);

/// TRANSCRIBE then ALIGN for every span.
StageReport transcribe_stage(const fs::path& assets_dir, const fs::path& spans, const BackendParams& backend,
                             const fs::path& out);

StageReport filter_stage(const fs::path& in, const fs::path& out, const fs::path& report_out,
                         const filter::FilterConfig& config);

/// Writes <out_dir>/<name>.jsonl (train/validation/test), one manifest per
/// nested subset, and <out_dir>/stats.txt.
StageReport sample_stage(const fs::path& segments, const fs::path& out_dir, const SampleParams& params,
                         const std::vector<std::string>& categories);

StageReport evaluate_stage(const fs::path& manifest, const fs::path& out_dir, const EvaluateParams& params);

inline constexpr std::string_view kStages[] = {"crawl", "fetch", "segment", "transcribe", "filter", "sample", "evaluate"};

/// Parses "a,b,c" (or "all"); keeps canonical order. Throws ConfigInvalid.
std::vector<std::string> parse_stages(const std::string& text);

struct StageSummary {
  std::string stage;
  bool skipped = false;
  double duration_s = 0.0;
  std::size_t records = 0;
};

struct RunSummary {
  std::vector<StageSummary> stages;
  double duration_s = 0.0;
};

/// Workspace layout (relative to config.workspace):
///   catalog.jsonl, audio/, vad/, spans.jsonl, segments.jsonl, filtered.jsonl,
///   filter_report.json, corpus/, eval/, .stages/<stage>.done, run_summary.json
/// A stage is skipped when its marker records the same input digest and its
/// outputs still match the recorded output digest.
/// Errors: ConfigInvalid, StageFailed (names the stage).
RunSummary run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages);

}  // namespace corpusforge::pipeline
