#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpusforge/error.hpp"

namespace corpusforge::feeds {

/// The sixteen podcast domains used by default.
const std::vector<std::string>& default_categories();

struct FeedSource {
  std::string feed_url;
  std::string category;
  std::string language_tag = "el";
};

/// Throws PreconditionViolation naming the broken invariant.
void validate(const FeedSource& source, std::span<const std::string> categories);

struct Episode {
  std::string episode_id;
  std::string feed_url;
  std::string podcast_name;
  std::string title;
  std::string enclosure_url;
  std::string category;
  std::string language_tag;
  std::optional<double> declared_duration_s;
  std::optional<std::int64_t> publish_time;  // unix seconds, UTC
  std::optional<std::string> enclosure_sha256;  // lowercase hex, when the feed declares one

  bool operator==(const Episode&) const = default;
};

/// First 128 bits of SHA-256 over feed_url, guid and enclosure_url joined by
/// U+001F, as 32 lowercase hex digits.
std::string make_episode_id(std::string_view feed_url, std::string_view guid, std::string_view enclosure_url);

enum class FeedFormat { Rss2, Atom };

struct ParsedFeed {
  FeedFormat format = FeedFormat::Rss2;
  std::string podcast_name;
  std::vector<Episode> episodes;
  std::size_t item_count = 0;
  std::size_t skipped_without_audio = 0;  // items lacking a usable audio enclosure
  std::size_t duplicates = 0;
};

/// Errors: MalformedFeed, UnsupportedFeedFormat, EmptyFeed.
ParsedFeed parse_feed(std::string_view xml_bytes, const FeedSource& source);

// Parsers for the date and duration encodings seen in podcast feeds.
std::optional<std::int64_t> parse_rfc822_date(std::string_view text);
std::optional<std::int64_t> parse_rfc3339_date(std::string_view text);
std::optional<double> parse_itunes_duration(std::string_view text);

struct CategoryStats {
  std::size_t episode_count = 0;
  std::size_t podcast_count = 0;
  double declared_hours = 0.0;
  std::size_t unknown_duration_count = 0;

  bool operator==(const CategoryStats&) const = default;
};

class FeedCatalog {
 public:
  /// Returns false (and leaves the catalog unchanged) on a duplicate episode_id.
  bool add(Episode episode);

  const std::vector<Episode>& episodes() const { return episodes_; }
  const std::map<std::string, CategoryStats>& per_category_stats() const { return stats_; }
  bool empty() const { return episodes_.empty(); }
  std::size_t size() const { return episodes_.size(); }

  /// Rebuilds statistics from the episode list.
  static std::map<std::string, CategoryStats> recompute_stats(std::span<const Episode> episodes);

  /// Stored statistics agree with a recomputation (hours within 1e-9 h).
  bool consistent() const;

  bool operator==(const FeedCatalog& other) const { return episodes_ == other.episodes_; }

 private:
  std::vector<Episode> episodes_;
  std::set<std::string> ids_;
  std::map<std::string, std::set<std::string>> podcasts_;
  std::map<std::string, CategoryStats> stats_;
};

struct CrawlPolicy {
  std::size_t max_inflight = 4;
  std::chrono::milliseconds per_host_delay{1000};
  int max_retries = 2;  // additional attempts after the first, for transient failures
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{30000};
  std::vector<std::string> categories = default_categories();
};

struct CrawlFailure {
  std::string feed_url;
  ErrorCode code;
  std::string message;
};

struct CrawlResult {
  FeedCatalog catalog;
  std::vector<CrawlFailure> failures;  // in source order
  std::size_t skipped_items = 0;
};

/// Fetches and parses every source concurrently, merging in source order.
/// Errors: PreconditionViolation (no sources), AllSourcesFailed.
CrawlResult crawl(std::span<const FeedSource> sources, const CrawlPolicy& policy);

struct StatsRow {
  std::string category;
  double hours = 0.0;  // from declared durations only
  std::size_t podcasts = 0;
  std::size_t episodes = 0;
  std::size_t unknown_duration_episodes = 0;

  bool operator==(const StatsRow&) const = default;
};

struct CatalogTable {
  std::vector<StatsRow> rows;  // sorted by category
  StatsRow total{"Total"};
};

CatalogTable catalog_stats(const FeedCatalog& catalog);
std::string format_catalog_table(const CatalogTable& table);

/// `url<TAB>category[<TAB>language]` per line; blank lines and '#' comments skipped.
std::vector<FeedSource> read_feed_list(const std::filesystem::path& path, std::string_view default_language = "el");

void write_catalog(const std::filesystem::path& path, const FeedCatalog& catalog);
FeedCatalog read_catalog(const std::filesystem::path& path);

}  // namespace corpusforge::feeds
