#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include "corpusforge/filter.hpp"
#include "corpusforge/io.hpp"
#include "filter_fixture.hpp"
#include "fixture_server.hpp"
#include "temp_dir.hpp"
#include "workspace_fixture.hpp"

#ifdef CFTEST_CLI

using namespace corpusforge;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(CFTEST_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int raw = ::pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, HelpSucceeds) {
  EXPECT_EQ(cli("--help").status, 0);
  EXPECT_EQ(cli("sample --help").status, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("nonsense").status, 2);
  EXPECT_EQ(cli("filter --in x").status, 2);
  EXPECT_EQ(cli("run --config /nonexistent.ini").status, 2);
}

TEST(Cli, StageErrorsExitThree) {
  cftest::TempDir dir;
  EXPECT_EQ(cli("filter --in " + q(dir / "missing.jsonl") + " --out " + q(dir / "o") + " --report " + q(dir / "r")).status, 3);
}

TEST(Cli, BadSubsetListIsUsageError) {
  cftest::TempDir dir;
  write_segments(dir / "s.jsonl", {});
  EXPECT_EQ(cli("sample --in " + q(dir / "s.jsonl") + " --subsets 2,x --out " + q(dir / "c")).status, 2);
}

TEST(Cli, FilterSubcommandOnLabeledFixture) {
  cftest::TempDir dir;
  const auto labeled = cftest::load_labeled_segments(std::string(CFTEST_FIXTURE_DIR) + "/filter/labeled_50.jsonl");
  std::vector<TranscribedSegment> segs;
  std::size_t keep = 0;
  for (const auto& l : labeled) {
    segs.push_back(l.segment);
    keep += l.label == "keep";
  }
  write_segments(dir / "in.jsonl", segs);
  const auto r = cli("filter --in " + q(dir / "in.jsonl") + " --out " + q(dir / "out.jsonl") + " --report " +
                     q(dir / "report.json"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(read_segments(dir / "out.jsonl").size(), keep);
  EXPECT_EQ(filter::read_report(dir / "report.json").kept_count, keep);
}

TEST(Cli, RunTwiceSkipsEverything) {
  cftest::FixtureServer server;
  cftest::TempDir dir;
#ifdef CFTEST_MOCK_BACKEND
  const std::string backend = std::string(CFTEST_MOCK_BACKEND) + " --seed 3";
#else
  const std::string backend = "mock:3";
#endif
  const auto config = cftest::WorkspaceFixture{}.build(server, dir.path(), backend);
  const auto first = cli("run --config " + q(config));
  ASSERT_EQ(first.status, 0) << first.out;
  EXPECT_EQ(first.out.find("skipped"), std::string::npos);
  const auto second = cli("run --config " + q(config));
  ASSERT_EQ(second.status, 0);
  EXPECT_EQ(second.out.find("completed"), std::string::npos) << second.out;
  EXPECT_NE(second.out.find("evaluate\tskipped"), std::string::npos);
}

TEST(Cli, UnknownStageIsUsageError) {
  cftest::FixtureServer server;
  cftest::TempDir dir;
  const auto config = cftest::WorkspaceFixture{}.build(server, dir.path(), "mock:1");
  EXPECT_EQ(cli("run --config " + q(config) + " --stages crawl,bogus").status, 2);
}

#endif
