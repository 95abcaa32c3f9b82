#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corpusforge::audio {

inline constexpr int kTargetSampleRate = 16000;
inline constexpr std::size_t kCanonicalHeaderSize = 44;

struct WavFormat {
  int format_code = 0;  // 1 = integer PCM, 3 = IEEE float (after resolving WAVE_FORMAT_EXTENSIBLE)
  int channels = 0;
  int sample_rate = 0;
  int bits_per_sample = 0;
  std::size_t frame_count = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;

  bool is_canonical_target() const {
    return format_code == 1 && channels == 1 && sample_rate == kTargetSampleRate && bits_per_sample == 16;
  }
};

/// Parses RIFF/WAVE chunk structure. Throws Error(UndecodableMedia).
WavFormat parse_wav_header(std::string_view bytes);

bool looks_like_wav(std::string_view bytes);

/// Interleaved samples scaled to [-1, 1).
struct DecodedAudio {
  int sample_rate = 0;
  int channels = 0;
  std::vector<double> samples;

  std::size_t frames() const { return channels == 0 ? 0 : samples.size() / static_cast<std::size_t>(channels); }
};

/// Decodes 8/16/24/32-bit integer or 32/64-bit float PCM WAV.
DecodedAudio decode_wav(std::string_view bytes);

/// Raw s16le payload of a 16 kHz mono 16-bit WAV; throws if the format differs.
std::vector<std::int16_t> read_pcm16_mono16k(std::string_view bytes);

/// Arithmetic mean across channels.
std::vector<double> downmix(const DecodedAudio& audio);

/// Band-limited (Blackman-windowed sinc) sample-rate conversion.
/// Output length is round(in.size() * to_rate / from_rate).
std::vector<double> resample(std::span<const double> in, int from_rate, int to_rate);

/// Round-to-nearest with clipping.
std::vector<std::int16_t> quantize_s16(std::span<const double> in);

/// Canonical 44-byte-header RIFF/WAVE, PCM s16le.
std::string encode_wav_s16(std::span<const std::int16_t> samples, int sample_rate, int channels);

inline std::string_view pcm_payload(std::string_view wav_bytes, const WavFormat& fmt) {
  return wav_bytes.substr(fmt.data_offset, fmt.data_size);
}

}  // namespace corpusforge::audio
