#include "corpusforge/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <fstream>
#include <thread>

#include "corpusforge/hash.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/url.hpp"
#include "corpusforge/wav.hpp"
#include "http.hpp"
#include "jsonl.hpp"

namespace corpusforge::ingest {
namespace fs = std::filesystem;

namespace {

std::string media_extension(const std::string& enclosure_url) {
  const auto url = parse_http_url(enclosure_url);
  std::string path = url ? url->target : enclosure_url;
  path = path.substr(0, path.find_first_of("?#"));
  const auto slash = path.rfind('/');
  const auto dot = path.rfind('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return ".bin";
  auto ext = path.substr(dot);
  if (ext.size() < 2 || ext.size() > 6 ||
      !std::all_of(ext.begin() + 1, ext.end(), [](unsigned char c) { return std::isalnum(c); }))
    return ".bin";
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// "bytes START-END/TOTAL" -> START
std::optional<std::uintmax_t> content_range_start(const std::string& header) {
  const auto sp = header.find(' ');
  const auto dash = header.find('-');
  if (sp == std::string::npos || dash == std::string::npos || dash < sp) return std::nullopt;
  std::uintmax_t v = 0;
  const auto [p, ec] = std::from_chars(header.data() + sp + 1, header.data() + dash, v);
  if (ec != std::errc{}) return std::nullopt;
  return v;
}

std::optional<std::uintmax_t> parse_length(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::uintmax_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
  return v;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

void verify_digest(const fs::path& file, const feeds::Episode& episode) {
  if (!episode.enclosure_sha256) return;
  const auto actual = sha256_file_hex(file);
  if (actual != *episode.enclosure_sha256) {
    std::error_code ec;
    fs::remove(file, ec);
    raise(ErrorCode::ChecksumMismatch,
          episode.episode_id + ": declared sha256 " + *episode.enclosure_sha256 + ", got " + actual);
  }
}

}  // namespace

fs::path fetch_episode(const feeds::Episode& episode, const fs::path& dest_dir, const RetryPolicy& policy) {
  require(policy.max_retries >= 0, "max_retries must be nonnegative");
  fs::create_directories(dest_dir);
  const auto final_path = dest_dir / (episode.episode_id + media_extension(episode.enclosure_url));
  if (fs::exists(final_path)) return final_path;
  auto part_path = final_path;
  part_path += ".part";

  const http::Timeouts timeouts{policy.connect_timeout, policy.read_timeout};
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(policy.backoff * attempt);

    std::uintmax_t offset = fs::exists(part_path) ? fs::file_size(part_path) : 0;
    http::Headers headers;
    if (offset > 0) headers.emplace_back("Range", "bytes=" + std::to_string(offset) + "-");

    std::ofstream out;
    std::optional<std::uintmax_t> expected_total;
    bool fatal_status = false;
    auto on_headers = [&](const http::Response& r) {
      if (r.status == 206 && offset > 0 && content_range_start(r.header("content-range")) == offset) {
        out.open(part_path, std::ios::binary | std::ios::app);
        if (const auto len = parse_length(r.header("content-length"))) expected_total = offset + *len;
      } else if (r.status == 200) {
        offset = 0;  // server ignored the range: start over
        out.open(part_path, std::ios::binary | std::ios::trunc);
        expected_total = parse_length(r.header("content-length"));
      } else {
        fatal_status = !retryable_status(r.status) && r.status != 416;
        if (r.status == 416) {
          std::error_code ec;
          fs::remove(part_path, ec);
        }
        last_error = "HTTP " + std::to_string(r.status);
        return false;
      }
      return static_cast<bool>(out);
    };
    auto on_data = [&](const char* data, std::size_t len) {
      out.write(data, static_cast<std::streamsize>(len));
      return static_cast<bool>(out);
    };
    const auto response = http::get_stream(episode.enclosure_url, timeouts, headers, on_headers, on_data);
    out.close();

    if (fatal_status) break;
    if (!response.transport_ok) {
      last_error = response.error.empty() ? last_error : response.error;
      continue;
    }
    if (response.status != 200 && response.status != 206) continue;
    const auto have = fs::exists(part_path) ? fs::file_size(part_path) : 0;
    if (expected_total && have != *expected_total) {
      last_error = "incomplete body: " + std::to_string(have) + " of " + std::to_string(*expected_total) + " bytes";
      continue;
    }
    verify_digest(part_path, episode);
    fs::rename(part_path, final_path);
    return final_path;
  }
  raise(ErrorCode::FetchFailed, episode.enclosure_url + ": " + last_error);
}

AudioAsset normalize_audio(const fs::path& raw, const fs::path& out_wav, const MediaDecoder& decoder) {
  const auto samples = decoder.decode(raw);
  if (samples.empty()) raise(ErrorCode::ZeroLengthAudio, raw.string() + " decodes to zero frames");
  const auto bytes = audio::encode_wav_s16(samples, audio::kTargetSampleRate, 1);
  write_file_atomic(out_wav, bytes);

  AudioAsset asset;
  asset.episode_id = out_wav.stem().string();
  asset.path = out_wav;
  asset.sample_rate_hz = audio::kTargetSampleRate;
  asset.channels = 1;
  asset.frame_count = samples.size();
  asset.duration_s = static_cast<double>(samples.size()) / audio::kTargetSampleRate;
  asset.content_sha256 = sha256_hex(std::string_view(bytes).substr(audio::kCanonicalHeaderSize));
  asset.source_format = decoder.describe(raw);
  return asset;
}

namespace {

struct CategoryOutcome {
  std::vector<AudioAsset> assets;
  std::vector<IngestFailure> failures;
  double seconds = 0.0;
  std::size_t reused = 0;
};

bool still_valid(const AudioAsset& asset) {
  if (!fs::exists(asset.path)) return false;
  try {
    const auto bytes = read_file(asset.path);
    const auto fmt = audio::parse_wav_header(bytes);
    return fmt.is_canonical_target() && sha256_hex(audio::pcm_payload(bytes, fmt)) == asset.content_sha256;
  } catch (const Error&) {
    return false;
  }
}

CategoryOutcome ingest_category(const std::string& category, std::vector<const feeds::Episode*> episodes,
                                const IngestOptions& options, const MediaDecoder& decoder,
                                const std::map<std::string, const AudioAsset*>& previous) {
  std::ranges::sort(episodes, [](const feeds::Episode* a, const feeds::Episode* b) {
    if (a->publish_time.has_value() != b->publish_time.has_value()) return a->publish_time.has_value();
    if (a->publish_time && *a->publish_time != *b->publish_time) return *a->publish_time > *b->publish_time;
    return a->episode_id < b->episode_id;
  });
  const std::optional<double> cap_s =
      options.cap_hours_per_category ? std::optional(*options.cap_hours_per_category * 3600.0) : std::nullopt;

  CategoryOutcome out;
  for (const auto* ep : episodes) {
    if (cap_s && out.seconds >= *cap_s) break;
    try {
      AudioAsset asset;
      if (auto it = previous.find(ep->episode_id); it != previous.end() && still_valid(*it->second)) {
        asset = *it->second;
        ++out.reused;
      } else {
        const auto raw = fetch_episode(*ep, options.raw_dir, options.retry);
        asset = normalize_audio(raw, options.wav_dir / (ep->episode_id + ".wav"), decoder);
      }
      asset.category = category;
      out.seconds += asset.duration_s;
      out.assets.push_back(std::move(asset));
    } catch (const Error& e) {
      out.failures.push_back({ep->episode_id, e.code(), e.what()});
    }
  }
  return out;
}

}  // namespace

IngestResult ingest_catalog(const feeds::FeedCatalog& catalog, const IngestOptions& options) {
  require(!catalog.empty(), "catalog is empty");
  require(!options.cap_hours_per_category || *options.cap_hours_per_category >= 0.0,
          "cap_hours_per_category must be nonnegative");
  fs::create_directories(options.raw_dir);
  fs::create_directories(options.wav_dir);

  const AutoDecoder fallback;
  const MediaDecoder& decoder = options.decoder != nullptr ? *options.decoder : fallback;

  std::map<std::string, const AudioAsset*> previous;
  for (const auto& a : options.previous) previous[a.episode_id] = &a;

  std::map<std::string, std::vector<const feeds::Episode*>> by_category;
  for (const auto& ep : catalog.episodes()) by_category[ep.category].push_back(&ep);
  std::vector<std::string> categories;
  for (const auto& [cat, _] : by_category) categories.push_back(cat);

  std::vector<CategoryOutcome> outcomes(categories.size());
  std::atomic<std::size_t> next{0};
  {
    std::size_t workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, categories.size());
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < categories.size(); i = next.fetch_add(1))
          outcomes[i] = ingest_category(categories[i], by_category[categories[i]], options, decoder, previous);
      });
    }
  }

  IngestResult result;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    auto& o = outcomes[i];
    result.per_category_seconds[categories[i]] = o.seconds;
    result.reused += o.reused;
    std::ranges::move(o.assets, std::back_inserter(result.assets));
    std::ranges::move(o.failures, std::back_inserter(result.failures));
  }
  return result;
}

void write_asset_index(const fs::path& path, const std::vector<AudioAsset>& assets) {
  std::vector<jsonl::Json> records;
  for (const auto& a : assets) {
    jsonl::Json j;
    j["episode_id"] = a.episode_id;
    j["category"] = a.category;
    // Relative to the index file, so a workspace can be moved.
    j["path"] = fs::absolute(a.path).lexically_proximate(fs::absolute(path).parent_path()).string();
    j["sample_rate_hz"] = a.sample_rate_hz;
    j["channels"] = a.channels;
    j["frame_count"] = a.frame_count;
    j["duration_s"] = a.duration_s;
    j["content_sha256"] = a.content_sha256;
    j["source_format"] = a.source_format;
    records.push_back(std::move(j));
  }
  jsonl::write(path, records);
}

std::vector<AudioAsset> read_asset_index(const fs::path& path) {
  std::vector<AudioAsset> out;
  const auto ctx = path.string();
  for (const auto& j : jsonl::read(path)) {
    AudioAsset a;
    a.episode_id = jsonl::get<std::string>(j, "episode_id", ctx);
    a.category = jsonl::get<std::string>(j, "category", ctx);
    a.path = jsonl::get<std::string>(j, "path", ctx);
    if (a.path.is_relative()) a.path = fs::absolute(path).parent_path() / a.path;
    a.sample_rate_hz = jsonl::get<int>(j, "sample_rate_hz", ctx);
    a.channels = jsonl::get<int>(j, "channels", ctx);
    a.frame_count = jsonl::get<std::uint64_t>(j, "frame_count", ctx);
    a.duration_s = jsonl::get<double>(j, "duration_s", ctx);
    a.content_sha256 = jsonl::get<std::string>(j, "content_sha256", ctx);
    a.source_format = jsonl::get<std::string>(j, "source_format", ctx);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace corpusforge::ingest
