#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpusforge/backend.hpp"
#include "corpusforge/eval.hpp"
#include "corpusforge/feeds.hpp"
#include "corpusforge/filter.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/segment.hpp"

namespace corpusforge {

struct SampleParams {
  double hours_per_category = 50.0;
  double test_s_per_category = 3600.0;
  double val_s_per_category = 900.0;
  std::vector<double> subsets_h{20.0, 10.0, 5.0, 2.0};
  std::uint64_t seed = 0;
  std::string corpus_name;  // empty: derived from hours_per_category

  std::string effective_name() const;
};

struct BackendParams {
  std::string command;  // "mock:<seed>" or a shell command
  std::string vad_command, transcribe_command, align_command;  // empty: `command`
  backend::SubprocessOptions options;
  std::size_t workers = 1;

  const std::string& for_op(backend::Op op) const;
};

struct FetchParams {
  std::optional<double> cap_hours_per_category;
  ingest::RetryPolicy retry;
  std::size_t workers = 0;
  std::string decoder_program;  // empty: builtin WAV decoding only
};

struct EvaluateParams {
  std::filesystem::path hyps;  // empty: score references against themselves
  std::string profile = "greek-basic-v1";
  std::string split = "test";
  std::map<std::string, double> curve_hours;
  std::optional<std::string> baseline_model;
};

/// INI-style file with sections workspace, crawl, fetch, segment, backend,
/// filter, sample and evaluate. Every scalar can be overridden by the
/// environment variable CORPUSFORGE_<SECTION>_<KEY> (upper case).
struct PipelineConfig {
  std::filesystem::path workspace;
  std::vector<std::string> categories;
  std::filesystem::path feed_list;
  feeds::CrawlPolicy crawl;
  FetchParams fetch;
  segment::SegmenterConfig segmenter;
  BackendParams backend;
  filter::FilterConfig filter;
  SampleParams sample;
  EvaluateParams evaluate;

  /// Effective "section.key" -> value after defaults, file and environment.
  std::map<std::string, std::string> settings;

  /// Concatenated effective settings of the given sections, for digests.
  std::string settings_text(const std::vector<std::string>& sections) const;
};

using Environment = std::map<std::string, std::string>;

/// Errors: ConfigInvalid (syntax, unknown section or key, bad value).
/// Relative paths are taken relative to the config file's directory. With no
/// `env`, the process environment is consulted.
PipelineConfig load_config(const std::filesystem::path& path, const Environment* env = nullptr);
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                            const Environment* env = nullptr);

std::vector<std::string> split_list(const std::string& text, char sep);

}  // namespace corpusforge
