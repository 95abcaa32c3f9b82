#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "corpusforge/backend.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/hash.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/prng.hpp"
#include "corpusforge/text.hpp"
#include "corpusforge/wav.hpp"
#include "jsonl.hpp"

namespace corpusforge::backend {
namespace {

constexpr std::array<std::string_view, 40> kVocabulary = {
    "καλημέρα", "σήμερα",    "μιλάμε",   "για",       "την",     "ιστορία",   "της",      "Ελλάδας",
    "και",      "τον",       "πολιτισμό", "είναι",    "πολύ",    "σημαντικό", "να",       "ακούσουμε",
    "τους",     "ανθρώπους", "που",      "ζουν",      "στην",    "πόλη",      "ένα",      "θέμα",
    "οικονομία", "αθλητισμός", "μουσική", "επιστήμη", "παιδιά",  "γιατί",     "όμως",     "λοιπόν",
    "εκπομπή",  "ακροατές",  "συζήτηση", "ερώτηση",   "απάντηση", "χρόνος",   "κόσμος",   "ευχαριστούμε"};

constexpr double kSpeechRunMin = 1.5, kSpeechRunMax = 45.0;
constexpr double kPauseMin = 0.3, kPauseMax = 2.5;
constexpr double kDipProbability = 0.02;
constexpr double kWordsPerSecond = 2.2;
// Injected so that the filter stage has something to remove.
constexpr double kCaptionProbability = 0.04;
constexpr double kCodeSwitchProbability = 0.04;
constexpr std::string_view kCaption = "Υπότιτλοι AUTHORWAVE";
constexpr std::string_view kCodeSwitchTail = "ακολουθήστε με στο Instagram";

struct AudioInfo {
  std::string digest;
  double duration_s = 0.0;
};

AudioInfo inspect(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    raise(ErrorCode::BackendRejected, e.what());
  }
  audio::WavFormat fmt;
  try {
    fmt = audio::parse_wav_header(bytes);
  } catch (const Error& e) {
    raise(ErrorCode::BackendRejected, e.what());
  }
  if (fmt.frame_count == 0) raise(ErrorCode::BackendRejected, "empty audio: " + path.string());
  return {sha256_hex(audio::pcm_payload(bytes, fmt)), static_cast<double>(fmt.frame_count) / fmt.sample_rate};
}

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

TimeSpan resolve_span(const BackendRequest& r, double duration) {
  if (!r.span) return {0.0, duration};
  if (r.span->end_s > duration + 1e-6)
    raise(ErrorCode::BackendRejected, "span end " + shortest(r.span->end_s) + " beyond audio duration " + shortest(duration));
  return {r.span->start_s, std::min(r.span->end_s, duration)};
}

std::uint64_t key_for(std::uint64_t seed, Op op, const AudioInfo& info, const TimeSpan& span) {
  std::string label(to_string(op));
  label += '|' + info.digest + '|' + shortest(span.start_s) + '|' + shortest(span.end_s);
  return derive_seed(seed, label);
}

segment::VadTrace make_trace(Xoshiro256& rng, double duration) {
  segment::VadTrace t;
  t.frame_hop_s = MockBackend::kFrameHop;
  t.audio_duration_s = duration;
  const auto n = segment::VadTrace::expected_frames(duration, t.frame_hop_s);
  t.scores.reserve(n);
  bool speech = rng.unit() < 0.5;
  while (t.scores.size() < n) {
    const double run_s = speech ? rng.uniform(kSpeechRunMin, kSpeechRunMax) : rng.uniform(kPauseMin, kPauseMax);
    auto frames = static_cast<std::size_t>(std::ceil(run_s / t.frame_hop_s));
    for (; frames > 0 && t.scores.size() < n; --frames) {
      if (!speech)
        t.scores.push_back(rng.uniform(0.0, 0.25));
      else if (rng.unit() < kDipProbability)
        t.scores.push_back(rng.uniform(0.37, 0.49));
      else
        t.scores.push_back(rng.uniform(0.75, 1.0));
    }
    speech = !speech;
  }
  return t;
}

std::string make_transcript(Xoshiro256& rng, double duration) {
  if (rng.unit() < kCaptionProbability) return std::string(kCaption);
  const auto words = std::max<long long>(1, std::llround(kWordsPerSecond * duration));
  std::string out;
  for (long long i = 0; i < words; ++i) {
    if (!out.empty()) out += ' ';
    out += kVocabulary[rng.below(kVocabulary.size())];
  }
  if (rng.unit() < kCodeSwitchProbability) {
    out += ' ';
    out += kCodeSwitchTail;
  }
  return out;
}

std::vector<WordTiming> spread(const std::string& transcript, const TimeSpan& span) {
  const auto words = text::split_whitespace(transcript);
  std::vector<WordTiming> out;
  const double n = static_cast<double>(words.size());
  const double width = span.end_s - span.start_s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const double a = span.start_s + width * static_cast<double>(i) / n;
    const double b = span.start_s + width * static_cast<double>(i + 1) / n;
    out.push_back({words[i], a, b, 1.0});
  }
  return out;
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed) : seed_(seed) {
  handshake_.capabilities = {Op::Vad, Op::Transcribe, Op::Align};
  handshake_.version = "corpusforge-mock/1 seed=" + std::to_string(seed);
}

BackendResponse MockBackend::call(BackendRequest request) {
  request.validate();
  const auto info = inspect(request.audio_path);
  const auto span = resolve_span(request, info.duration_s);
  Xoshiro256 rng(key_for(seed_, request.op, info, span));

  BackendResponse r;
  r.id = request.id;
  r.op = request.op;
  switch (request.op) {
    case Op::Vad: r.payload = make_trace(rng, span.end_s - span.start_s); break;
    case Op::Transcribe: r.payload = Transcription{make_transcript(rng, span.end_s - span.start_s), request.language_tag}; break;
    case Op::Align: r.payload = spread(*request.transcript, span); break;
  }
  return r;
}

std::unique_ptr<Backend> mock_backend(std::uint64_t seed) { return std::make_unique<MockBackend>(seed); }

std::unique_ptr<Backend> make_backend(const std::string& spec, SubprocessOptions options) {
  constexpr std::string_view prefix = "mock:";
  if (spec.starts_with(prefix)) {
    std::uint64_t seed = 0;
    const auto* first = spec.data() + prefix.size();
    const auto* last = spec.data() + spec.size();
    auto [ptr, ec] = std::from_chars(first, last, seed);
    require(ec == std::errc{} && ptr == last && first != last, "bad mock backend spec '" + spec + "'");
    return mock_backend(seed);
  }
  return std::make_unique<SubprocessBackend>(spec, options);
}

std::size_t serve(Backend& backend, std::istream& in, std::ostream& out) {
  out << encode_handshake(backend.handshake()) << '\n' << std::flush;
  std::size_t served = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::uint64_t id = 0;
    try {
      // Best effort, so a failure can still be correlated.
      auto j = jsonl::Json::parse(line, nullptr, false);
      if (j.is_object() && j.contains("id") && j["id"].is_number_unsigned()) id = j["id"].get<std::uint64_t>();
      auto request = decode_request(line);
      if (!backend.handshake().supports(request.op))
        raise(ErrorCode::ProtocolViolation, "op " + std::string(to_string(request.op)) + " not advertised");
      auto response = backend.call(std::move(request));
      response.id = id;
      out << encode_response(response) << '\n';
    } catch (const Error& e) {
      out << encode_failure({id, std::string(to_string(e.code())), e.what()}) << '\n';
    }
    out << std::flush;
    ++served;
  }
  return served;
}

}  // namespace corpusforge::backend
