#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corpusforge/error.hpp"
#include "corpusforge/feeds.hpp"

namespace corpusforge::ingest {

struct RetryPolicy {
  int max_retries = 3;  // additional attempts after the first
  std::chrono::milliseconds backoff{200};
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{30000};
};

/// Downloads the enclosure into `dest_dir` as `<episode_id><ext>`. A `.part`
/// file is resumed with a Range request; the final name appears only once the
/// download is complete. An existing final file is returned without network
/// traffic. Errors: FetchFailed, ChecksumMismatch.
std::filesystem::path fetch_episode(const feeds::Episode& episode, const std::filesystem::path& dest_dir,
                                    const RetryPolicy& policy);

/// Turns a media file into mono 16 kHz s16 samples.
class MediaDecoder {
 public:
  virtual ~MediaDecoder() = default;
  virtual std::vector<std::int16_t> decode(const std::filesystem::path& media) const = 0;
  /// Short provenance tag for the source container/codec.
  virtual std::string describe(const std::filesystem::path& media) const = 0;
};

/// Reads RIFF/WAVE PCM directly: mean downmix, windowed-sinc resampling.
class WavDecoder final : public MediaDecoder {
 public:
  std::vector<std::int16_t> decode(const std::filesystem::path& media) const override;
  std::string describe(const std::filesystem::path& media) const override;
};

/// Runs an external converter with a fixed argument list:
///   <program> -nostdin -hide_banner -loglevel error -y -i <in> -vn -ac 1 -ar 16000
///             -c:a pcm_s16le -f wav <out>
/// (ffmpeg-compatible). Its output must be PCM s16le mono 16 kHz.
class ExternalDecoder final : public MediaDecoder {
 public:
  explicit ExternalDecoder(std::string program) : program_(std::move(program)) {}
  std::vector<std::int16_t> decode(const std::filesystem::path& media) const override;
  std::string describe(const std::filesystem::path& media) const override;

  std::vector<std::string> argv(const std::filesystem::path& in, const std::filesystem::path& out) const;

 private:
  std::string program_;
};

/// WAV input goes to WavDecoder; anything else to the external decoder when
/// one is configured, otherwise UndecodableMedia.
class AutoDecoder final : public MediaDecoder {
 public:
  explicit AutoDecoder(std::optional<std::string> external_program = std::nullopt);
  std::vector<std::int16_t> decode(const std::filesystem::path& media) const override;
  std::string describe(const std::filesystem::path& media) const override;

 private:
  WavDecoder wav_;
  std::optional<ExternalDecoder> external_;
};

struct AudioAsset {
  std::string episode_id;
  std::string category;
  std::filesystem::path path;
  int sample_rate_hz = 16000;
  int channels = 1;
  std::uint64_t frame_count = 0;
  double duration_s = 0.0;
  std::string content_sha256;  // of the PCM payload only
  std::string source_format;

  bool operator==(const AudioAsset&) const = default;
};

/// Decodes `raw` and writes a canonical WAV at `out_wav`.
/// Errors: UndecodableMedia, ZeroLengthAudio.
AudioAsset normalize_audio(const std::filesystem::path& raw, const std::filesystem::path& out_wav,
                           const MediaDecoder& decoder);

struct IngestOptions {
  std::filesystem::path raw_dir;
  std::filesystem::path wav_dir;
  std::optional<double> cap_hours_per_category;
  RetryPolicy retry;
  std::size_t workers = 0;  // 0: hardware concurrency
  const MediaDecoder* decoder = nullptr;  // nullptr: AutoDecoder without external program
  std::vector<AudioAsset> previous;       // earlier asset index, for reruns
};

struct IngestFailure {
  std::string episode_id;
  ErrorCode code;
  std::string message;
};

struct IngestResult {
  std::vector<AudioAsset> assets;  // grouped by category name, then selection order
  std::vector<IngestFailure> failures;
  std::map<std::string, double> per_category_seconds;
  std::size_t reused = 0;
};

/// Episodes of each category are taken newest-first (unknown dates last, then
/// by episode_id); with a cap, a category stops once its total reaches it.
IngestResult ingest_catalog(const feeds::FeedCatalog& catalog, const IngestOptions& options);

void write_asset_index(const std::filesystem::path& path, const std::vector<AudioAsset>& assets);
std::vector<AudioAsset> read_asset_index(const std::filesystem::path& path);

}  // namespace corpusforge::ingest
