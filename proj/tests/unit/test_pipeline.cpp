#include <gtest/gtest.h>

#include <chrono>

#include "corpusforge/config.hpp"
#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/filter.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/pipeline.hpp"
#include "fixture_server.hpp"
#include "temp_dir.hpp"
#include "workspace_fixture.hpp"

using namespace corpusforge;
namespace fs = std::filesystem;

namespace {

const Environment kNoEnv;

std::string backend_command() {
#ifdef CFTEST_MOCK_BACKEND
  return std::string(CFTEST_MOCK_BACKEND) + " --seed 5";
#else
  return "mock:5";
#endif
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

const std::vector<std::string> kAll(std::begin(pipeline::kStages), std::end(pipeline::kStages));

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override { config_path_ = fixture_.build(server_, dir_.path(), backend_command()); }

  PipelineConfig config(const Environment& env = kNoEnv) const { return load_config(config_path_, &env); }

  cftest::FixtureServer server_;
  cftest::TempDir dir_;
  cftest::WorkspaceFixture fixture_;
  fs::path config_path_;
};

}  // namespace

TEST_F(Pipeline, EndToEndThenIdempotentRerun) {
  const auto cfg = config();
  const auto t0 = std::chrono::steady_clock::now();
  const auto first = pipeline::run_pipeline(cfg, kAll);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(elapsed, 60.0);

  ASSERT_EQ(first.stages.size(), 7u);
  for (const auto& s : first.stages) {
    EXPECT_FALSE(s.skipped) << s.stage;
    EXPECT_GT(s.records, 0u) << s.stage;
  }
  const auto ws = cfg.workspace;
  for (const char* f : {"catalog.jsonl", "audio/assets.jsonl", "spans.jsonl", "segments.jsonl", "filtered.jsonl",
                        "filter_report.json", "corpus/GPC-0.03.jsonl", "corpus/stats.txt", "eval/report.txt",
                        "eval/report.jsonl", "eval/per_domain.tsv", "eval/scaling_curve.tsv", "run_summary.json"})
    EXPECT_TRUE(fs::exists(ws / f)) << f;

  const auto manifest = corpus::read_manifest(ws / "corpus" / "GPC-0.03.jsonl");
  EXPECT_TRUE(manifest.consistent());
  for (const auto& cat : fixture_.category_names()) EXPECT_GE(manifest.per_category_actual_s.at({"test", cat}), 20.0);

  const auto report = filter::read_report(ws / "filter_report.json");
  EXPECT_TRUE(report.consistent(read_segments(ws / "segments.jsonl"), read_segments(ws / "filtered.jsonl")));

  // Self-evaluation: every domain at 0.00.
  const auto per_domain = read_file(ws / "eval" / "per_domain.tsv");
  std::size_t rows = 0;
  for (std::size_t pos = per_domain.find('\n') + 1; pos < per_domain.size();) {
    const auto nl = per_domain.find('\n', pos);
    const auto line = per_domain.substr(pos, nl - pos);
    const auto tab = line.find('\t');
    EXPECT_EQ(line.substr(tab + 1, line.find('\t', tab + 1) - tab - 1), "0.00") << line;
    ++rows;
    pos = nl + 1;
  }
  EXPECT_EQ(rows, fixture_.category_names().size());
  EXPECT_NE(read_file(ws / "eval" / "report.txt").find("0.00"), std::string::npos);

  const auto second = pipeline::run_pipeline(cfg, kAll);
  for (const auto& s : second.stages) EXPECT_TRUE(s.skipped) << s.stage;
}

TEST_F(Pipeline, ChangedSettingRerunsDownstreamOnly) {
  pipeline::run_pipeline(config(), kAll);
  const auto again = pipeline::run_pipeline(config({{"CORPUSFORGE_SAMPLE_SEED", "77"}}), kAll);
  for (const auto& s : again.stages) {
    const bool downstream = s.stage == "sample" || s.stage == "evaluate";
    EXPECT_EQ(s.skipped, !downstream) << s.stage;
  }
}

TEST_F(Pipeline, TamperedOutputIsRebuilt) {
  const auto cfg = config();
  pipeline::run_pipeline(cfg, kAll);
  fs::remove(cfg.workspace / "eval" / "report.txt");
  const auto again = pipeline::run_pipeline(cfg, kAll);
  for (const auto& s : again.stages) EXPECT_EQ(s.skipped, s.stage != "evaluate") << s.stage;
  EXPECT_TRUE(fs::exists(cfg.workspace / "eval" / "report.txt"));
}

TEST_F(Pipeline, StageSubsetNeedsInputs) {
  EXPECT_EQ(code_of([&] { pipeline::run_pipeline(config(), {"filter"}); }), ErrorCode::StageFailed);
  const auto first = pipeline::run_pipeline(config(), {"crawl"});
  ASSERT_EQ(first.stages.size(), 1u);
  EXPECT_EQ(first.stages[0].stage, "crawl");
}

TEST_F(Pipeline, MissingBackendIsConfigInvalid) {
  EXPECT_EQ(code_of([&] { pipeline::run_pipeline(config({{"CORPUSFORGE_BACKEND_COMMAND", ""}}), kAll); }),
            ErrorCode::ConfigInvalid);
}

TEST_F(Pipeline, UnreachableFeedsFailTheCrawlStage) {
  cftest::TempDir other;
  write_file_atomic(other / "feeds.tsv", "http://127.0.0.1:1/feed.xml\tNews\tel\n");
  const auto cfg = config({{"CORPUSFORGE_CRAWL_FEEDS", (other / "feeds.tsv").string()},
                           {"CORPUSFORGE_CRAWL_MAX_RETRIES", "0"}});
  try {
    pipeline::run_pipeline(cfg, {"crawl"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StageFailed);
    EXPECT_NE(std::string(e.what()).find("crawl"), std::string::npos);
  }
}

TEST(PipelineStages, ParseKeepsCanonicalOrder) {
  EXPECT_EQ(pipeline::parse_stages("evaluate,crawl"), (std::vector<std::string>{"crawl", "evaluate"}));
  EXPECT_EQ(pipeline::parse_stages("all").size(), 7u);
  EXPECT_THROW(pipeline::parse_stages("crawl,bogus"), Error);
  EXPECT_THROW(pipeline::parse_stages(""), Error);
}
