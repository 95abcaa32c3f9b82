#include <unistd.h>

#include <atomic>
#include <fstream>

#include "corpusforge/ingest.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/wav.hpp"
#include "process.hpp"

namespace corpusforge::ingest {
namespace {

std::string extension_tag(const std::filesystem::path& media) {
  auto ext = media.extension().string();
  if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
  return ext.empty() ? "unknown" : ext;
}

}  // namespace

std::vector<std::int16_t> WavDecoder::decode(const std::filesystem::path& media) const {
  const auto bytes = read_file(media);
  const auto fmt = audio::parse_wav_header(bytes);
  if (fmt.is_canonical_target()) return audio::read_pcm16_mono16k(bytes);

  const auto decoded = audio::decode_wav(bytes);
  const auto mono = audio::downmix(decoded);
  const auto resampled = audio::resample(mono, decoded.sample_rate, audio::kTargetSampleRate);
  return audio::quantize_s16(resampled);
}

std::string WavDecoder::describe(const std::filesystem::path& media) const {
  const auto bytes = read_file(media);
  const auto fmt = audio::parse_wav_header(bytes);
  return "wav/" + std::string(fmt.format_code == 3 ? "f" : "s") + std::to_string(fmt.bits_per_sample) + "/" +
         std::to_string(fmt.sample_rate) + "Hz/" + std::to_string(fmt.channels) + "ch";
}

std::vector<std::string> ExternalDecoder::argv(const std::filesystem::path& in, const std::filesystem::path& out) const {
  return {program_, "-nostdin", "-hide_banner", "-loglevel", "error", "-y", "-i", in.string(), "-vn", "-ac", "1",
          "-ar",    "16000",    "-c:a",         "pcm_s16le", "-f",  "wav", out.string()};
}

std::vector<std::int16_t> ExternalDecoder::decode(const std::filesystem::path& media) const {
  static std::atomic<unsigned> counter{0};
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("corpusforge-decode-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".wav");
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  } cleanup{tmp};

  int status = 0;
  try {
    status = proc::run(argv(media, tmp));
  } catch (const Error& e) {
    raise(ErrorCode::UndecodableMedia, std::string("decoder did not start: ") + e.what());
  }
  if (status != 0 || !std::filesystem::exists(tmp))
    raise(ErrorCode::UndecodableMedia,
          "decoder exited with status " + std::to_string(status) + " for " + media.string());
  return audio::read_pcm16_mono16k(read_file(tmp));
}

std::string ExternalDecoder::describe(const std::filesystem::path& media) const {
  return "external/" + extension_tag(media);
}

AutoDecoder::AutoDecoder(std::optional<std::string> external_program) {
  if (external_program && !external_program->empty()) external_.emplace(std::move(*external_program));
}

namespace {

bool sniff_wav(const std::filesystem::path& media) {
  std::ifstream in(media, std::ios::binary);
  char head[12] = {};
  in.read(head, sizeof head);
  return in.gcount() == sizeof head && audio::looks_like_wav(std::string_view(head, sizeof head));
}

}  // namespace

std::vector<std::int16_t> AutoDecoder::decode(const std::filesystem::path& media) const {
  if (!std::filesystem::exists(media)) raise(ErrorCode::UndecodableMedia, "missing " + media.string());
  if (sniff_wav(media)) return wav_.decode(media);
  if (external_) return external_->decode(media);
  raise(ErrorCode::UndecodableMedia, media.string() + " is not WAV and no external decoder is configured");
}

std::string AutoDecoder::describe(const std::filesystem::path& media) const {
  if (sniff_wav(media)) return wav_.describe(media);
  if (external_) return external_->describe(media);
  return "unknown";
}

}  // namespace corpusforge::ingest
