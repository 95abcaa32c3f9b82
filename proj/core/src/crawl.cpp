#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "corpusforge/feeds.hpp"
#include "corpusforge/url.hpp"
#include "http.hpp"

namespace corpusforge::feeds {
namespace {

// Spaces out request starts to the same host by at least `delay`.
class HostThrottle {
 public:
  explicit HostThrottle(std::chrono::milliseconds delay) : delay_(delay) {}

  void acquire(const std::string& host) {
    using clock = std::chrono::steady_clock;
    clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = clock::now();
      auto& next = next_[host];
      slot = std::max(now, next);
      next = slot + delay_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds delay_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

struct SourceOutcome {
  std::optional<ParsedFeed> feed;
  std::optional<CrawlFailure> failure;
};

bool transient(const http::Response& r) { return !r.transport_ok || r.status == 429 || r.status >= 500; }

SourceOutcome crawl_one(const FeedSource& source, const CrawlPolicy& policy, HostThrottle& throttle) {
  SourceOutcome out;
  try {
    validate(source, policy.categories);
  } catch (const Error& e) {
    out.failure = CrawlFailure{source.feed_url, e.code(), e.what()};
    return out;
  }
  const auto url = parse_http_url(source.feed_url);
  const http::Timeouts timeouts{policy.connect_timeout, policy.read_timeout};

  http::Response response;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    throttle.acquire(url->host + ":" + std::to_string(url->port));
    response = http::get(source.feed_url, timeouts);
    if (!transient(response)) break;
  }
  if (!response.ok()) {
    const auto why = response.transport_ok ? "HTTP " + std::to_string(response.status) : response.error;
    out.failure = CrawlFailure{source.feed_url, ErrorCode::FetchFailed, why};
    return out;
  }
  try {
    out.feed = parse_feed(response.body, source);
  } catch (const Error& e) {
    out.failure = CrawlFailure{source.feed_url, e.code(), e.what()};
  }
  return out;
}

}  // namespace

CrawlResult crawl(std::span<const FeedSource> sources, const CrawlPolicy& policy) {
  require(!sources.empty(), "crawl needs at least one feed source");
  require(policy.max_inflight > 0, "max_inflight must be positive");
  require(policy.max_retries >= 0, "max_retries must be nonnegative");

  HostThrottle throttle(policy.per_host_delay);
  std::vector<SourceOutcome> outcomes(sources.size());
  std::atomic<std::size_t> next{0};
  {
    const auto workers = std::min(policy.max_inflight, sources.size());
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < sources.size(); i = next.fetch_add(1))
          outcomes[i] = crawl_one(sources[i], policy, throttle);
      });
    }
  }

  // Single merge point, in source order, so the catalog is deterministic.
  CrawlResult result;
  for (auto& o : outcomes) {
    if (o.failure) {
      result.failures.push_back(std::move(*o.failure));
      continue;
    }
    result.skipped_items += o.feed->skipped_without_audio;
    for (auto& ep : o.feed->episodes) result.catalog.add(std::move(ep));
  }
  if (result.failures.size() == sources.size()) {
    std::string msg = "all " + std::to_string(sources.size()) + " feed sources failed";
    if (!result.failures.empty()) msg += "; first: " + result.failures.front().message;
    raise(ErrorCode::AllSourcesFailed, msg);
  }
  return result;
}

}  // namespace corpusforge::feeds
