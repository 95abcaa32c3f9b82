#include "corpusforge/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>

#include "corpusforge/error.hpp"

namespace corpusforge::audio {
namespace {

std::uint32_t le32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t le16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

[[noreturn]] void undecodable(const std::string& why) { raise(ErrorCode::UndecodableMedia, why); }

}  // namespace

bool looks_like_wav(std::string_view bytes) {
  return bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WAVE";
}

WavFormat parse_wav_header(std::string_view bytes) {
  if (!looks_like_wav(bytes)) undecodable("not a RIFF/WAVE stream");
  WavFormat fmt;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto id = bytes.substr(pos, 4);
    std::size_t size = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) undecodable("truncated fmt chunk");
      fmt.format_code = le16(bytes, body);
      fmt.channels = le16(bytes, body + 2);
      fmt.sample_rate = static_cast<int>(le32(bytes, body + 4));
      fmt.bits_per_sample = le16(bytes, body + 14);
      if (fmt.format_code == 0xFFFE) {
        if (size < 40) undecodable("truncated WAVE_FORMAT_EXTENSIBLE chunk");
        fmt.format_code = le16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) undecodable("data chunk before fmt chunk");
      // Streamed writers leave the size as 0 or 0xFFFFFFFF; clamp to what is present.
      if (size == 0xFFFFFFFFu || body + size > bytes.size()) size = bytes.size() - body;
      fmt.data_offset = body;
      fmt.data_size = size;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) undecodable("missing fmt chunk");
  if (fmt.data_offset == 0) undecodable("missing data chunk");
  if (fmt.channels <= 0 || fmt.sample_rate <= 0) undecodable("invalid channel count or sample rate");
  const bool int_ok = fmt.format_code == 1 &&
                      (fmt.bits_per_sample == 8 || fmt.bits_per_sample == 16 || fmt.bits_per_sample == 24 ||
                       fmt.bits_per_sample == 32);
  const bool float_ok = fmt.format_code == 3 && (fmt.bits_per_sample == 32 || fmt.bits_per_sample == 64);
  if (!int_ok && !float_ok)
    undecodable("unsupported sample format " + std::to_string(fmt.format_code) + "/" +
                std::to_string(fmt.bits_per_sample) + " bit");
  const std::size_t block = static_cast<std::size_t>(fmt.channels) * static_cast<std::size_t>(fmt.bits_per_sample / 8);
  fmt.frame_count = fmt.data_size / block;
  fmt.data_size = fmt.frame_count * block;
  return fmt;
}

DecodedAudio decode_wav(std::string_view bytes) {
  const auto fmt = parse_wav_header(bytes);
  DecodedAudio out;
  out.sample_rate = fmt.sample_rate;
  out.channels = fmt.channels;
  const std::size_t n = fmt.frame_count * static_cast<std::size_t>(fmt.channels);
  out.samples.resize(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + fmt.data_offset);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (fmt.bits_per_sample) {
      case 8:
        v = fmt.format_code == 1 ? (static_cast<int>(p[i]) - 128) / 128.0 : 0.0;
        break;
      case 16: {
        const auto s = static_cast<std::int16_t>(p[2 * i] | p[2 * i + 1] << 8);
        v = s / 32768.0;
        break;
      }
      case 24: {
        std::int32_t s = p[3 * i] | p[3 * i + 1] << 8 | p[3 * i + 2] << 16;
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
        break;
      }
      case 32: {
        std::uint32_t raw = static_cast<std::uint32_t>(p[4 * i]) | static_cast<std::uint32_t>(p[4 * i + 1]) << 8 |
                            static_cast<std::uint32_t>(p[4 * i + 2]) << 16 |
                            static_cast<std::uint32_t>(p[4 * i + 3]) << 24;
        if (fmt.format_code == 3) {
          float f;
          std::memcpy(&f, &raw, sizeof f);
          v = f;
        } else {
          v = static_cast<std::int32_t>(raw) / 2147483648.0;
        }
        break;
      }
      case 64: {
        std::uint64_t raw = 0;
        for (int k = 7; k >= 0; --k) raw = raw << 8 | p[8 * i + static_cast<std::size_t>(k)];
        std::memcpy(&v, &raw, sizeof v);
        break;
      }
    }
    out.samples[i] = v;
  }
  return out;
}

std::vector<std::int16_t> read_pcm16_mono16k(std::string_view bytes) {
  const auto fmt = parse_wav_header(bytes);
  if (!fmt.is_canonical_target())
    raise(ErrorCode::UndecodableMedia, "expected PCM s16le mono 16000 Hz, got " + std::to_string(fmt.channels) +
                                           " ch " + std::to_string(fmt.sample_rate) + " Hz " +
                                           std::to_string(fmt.bits_per_sample) + " bit");
  std::vector<std::int16_t> out(fmt.frame_count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + fmt.data_offset);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::int16_t>(p[2 * i] | p[2 * i + 1] << 8);
  return out;
}

std::vector<double> downmix(const DecodedAudio& audio) {
  const auto frames = audio.frames();
  if (audio.channels == 1) return audio.samples;
  std::vector<double> out(frames);
  const auto ch = static_cast<std::size_t>(audio.channels);
  for (std::size_t f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (std::size_t c = 0; c < ch; ++c) sum += audio.samples[f * ch + c];
    out[f] = sum / static_cast<double>(ch);
  }
  return out;
}

std::vector<double> resample(std::span<const double> in, int from_rate, int to_rate) {
  if (from_rate == to_rate) return {in.begin(), in.end()};
  const auto g = std::gcd(from_rate, to_rate);
  const auto up = static_cast<std::uint64_t>(to_rate / g);    // phases
  const auto down = static_cast<std::uint64_t>(from_rate / g);
  const auto out_len = static_cast<std::size_t>((in.size() * up + down / 2) / down);
  std::vector<double> out(out_len);
  if (in.empty()) return out;

  // Cutoff at the lower Nyquist; kernel spans kZeroCrossings lobes each side.
  constexpr double kZeroCrossings = 16.0;
  const double cutoff = std::min(1.0, static_cast<double>(to_rate) / from_rate);
  const double half_width = kZeroCrossings / cutoff;
  const auto reach = static_cast<std::int64_t>(std::ceil(half_width));
  const auto taps = static_cast<std::size_t>(2 * reach + 1);

  auto kernel = [&](double x) {
    if (std::abs(x) >= half_width) return 0.0;
    const double arg = std::numbers::pi * cutoff * x;
    const double sinc = x == 0.0 ? 1.0 : std::sin(arg) / arg;
    return sinc * (0.42 + 0.5 * std::cos(std::numbers::pi * x / half_width) +
                   0.08 * std::cos(2.0 * std::numbers::pi * x / half_width));
  };

  // table[phase][j] weights input sample base + j - reach for output phase `phase`.
  std::vector<double> table(up * taps);
  for (std::uint64_t phase = 0; phase < up; ++phase) {
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    for (std::size_t j = 0; j < taps; ++j)
      table[phase * taps + j] = kernel(static_cast<double>(static_cast<std::int64_t>(j) - reach) - frac);
  }

  const auto size = static_cast<std::int64_t>(in.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const std::uint64_t pos = n * down;
    const auto base = static_cast<std::int64_t>(pos / up);
    const auto* w = &table[(pos % up) * taps];
    double acc = 0.0;
    double norm = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const auto k = base + static_cast<std::int64_t>(j) - reach;
      if (k < 0 || k >= size) continue;
      acc += in[static_cast<std::size_t>(k)] * w[j];
      norm += w[j];
    }
    out[n] = norm != 0.0 ? acc / norm : 0.0;
  }
  return out;
}

std::vector<std::int16_t> quantize_s16(std::span<const double> in) {
  std::vector<std::int16_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = std::nearbyint(in[i] * 32768.0);
    out[i] = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
  }
  return out;
}

std::string encode_wav_s16(std::span<const std::int16_t> samples, int sample_rate, int channels) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(kCanonicalHeaderSize + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, static_cast<std::uint16_t>(channels));
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
  put16(out, static_cast<std::uint16_t>(channels * 2));
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (auto s : samples) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

}  // namespace corpusforge::audio
