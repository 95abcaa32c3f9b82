#include <gtest/gtest.h>

#include <chrono>

#include "corpusforge/feeds.hpp"
#include "corpusforge/io.hpp"
#include "fixture_server.hpp"

using namespace corpusforge;
using namespace corpusforge::feeds;

namespace {

std::string fixture(const std::string& name) {
  return read_file(std::filesystem::path(CFTEST_FIXTURE_DIR) / "feeds" / name);
}

CrawlPolicy fast_policy() {
  CrawlPolicy p;
  p.per_host_delay = std::chrono::milliseconds(0);
  p.connect_timeout = std::chrono::milliseconds(2000);
  p.read_timeout = std::chrono::milliseconds(2000);
  return p;
}

class CrawlTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const char* name : {"01_rss_basic.xml", "05_atom_basic.xml", "03_rss_missing_enclosures.xml",
                             "08_malformed_unclosed.xml", "12_rss_cdata_entities.xml"})
      server.put(std::string("/") + name, {fixture(name), "application/rss+xml"});
  }

  FeedSource src(const std::string& name, const std::string& cat = "News") { return {server.url("/" + name), cat, "el"}; }

  cftest::FixtureServer server;
};

}  // namespace

TEST_F(CrawlTest, MergesInSourceOrderAndReportsFailures) {
  const std::vector<FeedSource> sources{src("01_rss_basic.xml"), src("08_malformed_unclosed.xml"),
                                        src("05_atom_basic.xml", "Science"), src("missing.xml"),
                                        src("03_rss_missing_enclosures.xml", "Arts")};
  const auto result = crawl(sources, fast_policy());

  std::vector<Episode> want;
  for (const auto& s : {sources[0], sources[2], sources[4]}) {
    const auto name = s.feed_url.substr(s.feed_url.rfind('/') + 1);
    auto parsed = parse_feed(fixture(name), s);
    want.insert(want.end(), parsed.episodes.begin(), parsed.episodes.end());
  }
  EXPECT_EQ(result.catalog.episodes(), want);
  ASSERT_EQ(result.failures.size(), 2u);
  EXPECT_EQ(result.failures[0].code, ErrorCode::MalformedFeed);
  EXPECT_EQ(result.failures[1].code, ErrorCode::FetchFailed);
  EXPECT_EQ(result.failures[1].feed_url, sources[3].feed_url);
  EXPECT_EQ(result.skipped_items, 1u + 4u);
  EXPECT_TRUE(result.catalog.consistent());
  EXPECT_EQ(result.catalog.per_category_stats().at("Science").episode_count, 2u);
}

TEST_F(CrawlTest, DeterministicAcrossConcurrency) {
  const std::vector<FeedSource> sources{src("01_rss_basic.xml"), src("05_atom_basic.xml", "Science"),
                                        src("12_rss_cdata_entities.xml", "Comedy")};
  auto p1 = fast_policy();
  p1.max_inflight = 1;
  auto p4 = fast_policy();
  p4.max_inflight = 4;
  EXPECT_EQ(crawl(sources, p1).catalog, crawl(sources, p4).catalog);
}

TEST_F(CrawlTest, TransientErrorsAreRetried) {
  cftest::FixtureServer::Resource flaky{fixture("01_rss_basic.xml"), "application/rss+xml"};
  flaky.fail_first = 2;
  server.put("/flaky.xml", flaky);
  auto policy = fast_policy();
  policy.max_retries = 2;
  const std::vector<FeedSource> sources{src("flaky.xml")};
  const auto result = crawl(sources, policy);
  EXPECT_EQ(result.catalog.size(), 3u);
  EXPECT_EQ(server.hits("/flaky.xml"), 3);
}

TEST_F(CrawlTest, RetriesAreBounded) {
  cftest::FixtureServer::Resource flaky{fixture("01_rss_basic.xml"), "application/rss+xml"};
  flaky.fail_first = 5;
  server.put("/flaky.xml", flaky);
  auto policy = fast_policy();
  policy.max_retries = 1;
  const std::vector<FeedSource> sources{src("flaky.xml"), src("01_rss_basic.xml")};
  const auto result = crawl(sources, policy);
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].code, ErrorCode::FetchFailed);
  EXPECT_EQ(server.hits("/flaky.xml"), 2);
}

TEST_F(CrawlTest, ClientErrorsAreNotRetried) {
  cftest::FixtureServer::Resource gone;
  gone.status = 404;
  server.put("/gone.xml", gone);
  auto policy = fast_policy();
  policy.max_retries = 3;
  const std::vector<FeedSource> sources{src("gone.xml"), src("01_rss_basic.xml")};
  crawl(sources, policy);
  EXPECT_EQ(server.hits("/gone.xml"), 1);
  EXPECT_EQ(server.hits("/01_rss_basic.xml"), 1);
}

TEST_F(CrawlTest, AllSourcesFailing) {
  const std::vector<FeedSource> sources{src("08_malformed_unclosed.xml"), src("gone.xml")};
  try {
    crawl(sources, fast_policy());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllSourcesFailed);
  }
}

TEST_F(CrawlTest, InvalidSourceIsAFailureNotACrash) {
  const std::vector<FeedSource> sources{{"not a url", "News", "el"}, src("01_rss_basic.xml", "Cooking"),
                                        src("01_rss_basic.xml")};
  const auto result = crawl(sources, fast_policy());
  ASSERT_EQ(result.failures.size(), 2u);
  EXPECT_EQ(result.failures[0].code, ErrorCode::PreconditionViolation);
  EXPECT_EQ(result.failures[1].code, ErrorCode::PreconditionViolation);
  EXPECT_EQ(result.catalog.size(), 3u);
}

TEST_F(CrawlTest, NoSourcesIsAPreconditionViolation) {
  EXPECT_THROW(crawl({}, fast_policy()), Error);
}

TEST_F(CrawlTest, PerHostDelayIsHonoured) {
  auto policy = fast_policy();
  policy.per_host_delay = std::chrono::milliseconds(150);
  policy.max_inflight = 3;
  const std::vector<FeedSource> sources{src("01_rss_basic.xml"), src("05_atom_basic.xml"),
                                        src("12_rss_cdata_entities.xml")};
  const auto t0 = std::chrono::steady_clock::now();
  crawl(sources, policy);
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_GE(elapsed, std::chrono::milliseconds(300));
}
