#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "audio_gen.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/wav.hpp"

using namespace corpusforge;
using namespace corpusforge::audio;

namespace {

void put(std::string& s, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-rolled RIFF writer, independent of encode_wav_s16.
std::string riff(int format, int channels, int rate, int bits, const std::string& payload, bool extensible = false,
                 bool junk_chunk = false) {
  std::string fmt;
  put(fmt, extensible ? 0xFFFE : static_cast<std::uint32_t>(format), 2);
  put(fmt, static_cast<std::uint32_t>(channels), 2);
  put(fmt, static_cast<std::uint32_t>(rate), 4);
  put(fmt, static_cast<std::uint32_t>(rate * channels * bits / 8), 4);
  put(fmt, static_cast<std::uint32_t>(channels * bits / 8), 2);
  put(fmt, static_cast<std::uint32_t>(bits), 2);
  if (extensible) {
    put(fmt, 22, 2);
    put(fmt, static_cast<std::uint32_t>(bits), 2);
    put(fmt, 0, 4);
    put(fmt, static_cast<std::uint32_t>(format), 2);
    fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  }
  std::string body = "WAVE";
  body += "fmt ";
  put(body, static_cast<std::uint32_t>(fmt.size()), 4);
  body += fmt;
  if (junk_chunk) {
    body += "LIST";
    put(body, 3, 4);
    body += "abc";
    body.push_back('\0');  // pad byte
  }
  body += "data";
  put(body, static_cast<std::uint32_t>(payload.size()), 4);
  body += payload;
  return "RIFF" + [&] { std::string s; put(s, static_cast<std::uint32_t>(body.size()), 4); return s; }() + body;
}

double rms(const std::vector<double>& x, std::size_t skip) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = skip; i + skip < x.size(); ++i, ++n) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(n));
}

std::vector<double> tone(double freq, int rate, double seconds, double amp = 0.5) {
  std::vector<double> v(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return v;
}

}  // namespace

TEST(Wav, CanonicalRoundTrip) {
  const std::vector<std::int16_t> pcm{0, 1, -1, 32767, -32768, 1234};
  const auto bytes = encode_wav_s16(pcm, 16000, 1);
  EXPECT_EQ(bytes.size(), kCanonicalHeaderSize + pcm.size() * 2);
  const auto fmt = parse_wav_header(bytes);
  EXPECT_TRUE(fmt.is_canonical_target());
  EXPECT_EQ(fmt.frame_count, pcm.size());
  EXPECT_EQ(fmt.data_offset, kCanonicalHeaderSize);
  EXPECT_EQ(read_pcm16_mono16k(bytes), pcm);
  EXPECT_EQ(bytes, riff(1, 1, 16000, 16, bytes.substr(44)));
}

TEST(Wav, DecodesAllSupportedSampleFormats) {
  std::string s8{"\x80\xC0\x40", 3};
  auto d8 = decode_wav(riff(1, 1, 8000, 8, s8));
  EXPECT_EQ(d8.samples, (std::vector<double>{0.0, 0.5, -0.5}));

  std::string s24;
  put(s24, 0x400000, 3);
  put(s24, 0xC00000, 3);
  auto d24 = decode_wav(riff(1, 1, 8000, 24, s24));
  EXPECT_EQ(d24.samples, (std::vector<double>{0.5, -0.5}));

  std::string s32;
  put(s32, 0x40000000u, 4);
  put(s32, 0x80000000u, 4);
  EXPECT_EQ(decode_wav(riff(1, 1, 8000, 32, s32)).samples, (std::vector<double>{0.5, -1.0}));

  float f[2] = {0.25f, -0.75f};
  EXPECT_EQ(decode_wav(riff(3, 1, 8000, 32, std::string(reinterpret_cast<char*>(f), 8))).samples,
            (std::vector<double>{0.25, -0.75}));
  double g[2] = {0.125, -0.5};
  EXPECT_EQ(decode_wav(riff(3, 1, 8000, 64, std::string(reinterpret_cast<char*>(g), 16))).samples,
            (std::vector<double>{0.125, -0.5}));
}

TEST(Wav, ExtensibleAndExtraChunks) {
  std::string s16;
  put(s16, 0x4000, 2);
  put(s16, 0xC000, 2);
  const auto d = decode_wav(riff(1, 2, 44100, 16, s16, true, true));
  EXPECT_EQ(d.channels, 2);
  EXPECT_EQ(d.sample_rate, 44100);
  EXPECT_EQ(d.samples, (std::vector<double>{0.5, -0.5}));
}

TEST(Wav, TruncatedDataIsClampedToWholeFrames) {
  std::string s16(7, '\0');
  auto bytes = riff(1, 2, 8000, 16, s16);
  const auto fmt = parse_wav_header(bytes);
  EXPECT_EQ(fmt.frame_count, 1u);
  bytes.resize(bytes.size() - 4);  // declared size now exceeds the file
  EXPECT_EQ(parse_wav_header(bytes).frame_count, 0u);
}

TEST(Wav, RejectsGarbage) {
  auto expect_undecodable = [](const std::string& bytes) {
    try {
      parse_wav_header(bytes);
      ADD_FAILURE() << "parsed";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UndecodableMedia);
    }
  };
  expect_undecodable("ID3\x03garbage");
  expect_undecodable("RIFF\x04\x00\x00\x00WAVE");
  expect_undecodable(riff(2, 1, 8000, 4, "ab"));   // ADPCM
  expect_undecodable(riff(1, 1, 8000, 12, "ab"));  // odd bit depth
  expect_undecodable(riff(1, 0, 8000, 16, "ab"));
  EXPECT_THROW(read_pcm16_mono16k(riff(1, 2, 16000, 16, "abcd")), Error);
}

TEST(Wav, DownmixIsChannelMean) {
  DecodedAudio a{8000, 2, {0.5, -0.5, 1.0, 0.0, 0.25, 0.25}};
  EXPECT_EQ(downmix(a), (std::vector<double>{0.0, 0.5, 0.25}));
}

TEST(Wav, QuantizeRoundsAndClips) {
  const std::vector<double> in{0.0, 0.5, -1.0, 1.0, 2.0, -3.0, 1.0 / 65536.0 * 1.01};
  EXPECT_EQ(quantize_s16(in), (std::vector<std::int16_t>{0, 16384, -32768, 32767, 32767, -32768, 1}));
}

TEST(Resample, LengthFollowsRateRatio) {
  for (int from : {8000, 22050, 44100, 48000, 16000}) {
    for (std::size_t n : {0u, 1u, 999u, 22050u}) {
      std::vector<double> x(n, 0.1);
      const auto y = resample(x, from, 16000);
      EXPECT_EQ(y.size(), static_cast<std::size_t>(std::llround(static_cast<double>(n) * 16000 / from))) << from << " " << n;
    }
  }
}

TEST(Resample, PreservesInBandTone) {
  const auto x = tone(440.0, 22050, 1.0);
  const auto y = resample(x, 22050, 16000);
  EXPECT_NEAR(rms(y, 200), 0.5 / std::sqrt(2.0), 0.01);
  // Phase check against the analytic tone at the new rate.
  const auto want = tone(440.0, 16000, 1.0);
  double worst = 0.0;
  for (std::size_t i = 200; i + 200 < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - want[i]));
  EXPECT_LT(worst, 0.01);
}

TEST(Resample, AttenuatesAboveTargetNyquist) {
  const auto x = tone(10000.0, 44100, 1.0);
  const auto y = resample(x, 44100, 16000);
  EXPECT_LT(rms(y, 200), 0.01);
}

TEST(Resample, DcIsPreservedAtEdges) {
  std::vector<double> x(4410, 0.3);
  for (double v : resample(x, 44100, 16000)) EXPECT_NEAR(v, 0.3, 1e-9);
}

TEST(Wav, GeneratorProducesRequestedShape) {
  const auto bytes = cftest::speechlike_wav(2.0, 22050, 2, 1);
  const auto fmt = parse_wav_header(bytes);
  EXPECT_EQ(fmt.sample_rate, 22050);
  EXPECT_EQ(fmt.channels, 2);
  EXPECT_EQ(fmt.frame_count, 44100u);
}
