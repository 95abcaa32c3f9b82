#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "audio_gen.hpp"
#include "corpusforge/backend.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/io.hpp"
#include "corpusforge/text.hpp"
#include "temp_dir.hpp"

using namespace corpusforge;
using namespace corpusforge::backend;
using Json = nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

BackendResponse vad_response() {
  segment::VadTrace t;
  t.frame_hop_s = 0.01;
  t.audio_duration_s = 0.03;
  t.scores = {0.0, 0.5, 1.0};
  return {7, Op::Vad, t};
}

}  // namespace

TEST(Protocol, HandshakeRoundTrip) {
  Handshake h{1, {Op::Vad, Op::Align}, "m/1"};
  EXPECT_EQ(decode_handshake(encode_handshake(h)), h);
  EXPECT_TRUE(h.supports(Op::Align));
  EXPECT_FALSE(h.supports(Op::Transcribe));
}

TEST(Protocol, RequestRoundTrip) {
  BackendRequest r;
  r.id = 42;
  r.op = Op::Align;
  r.audio_path = "/tmp/Ελλάδα file.wav";
  r.span = TimeSpan{1.25, 3.5};
  r.transcript = "γεια σου \"κόσμε\"\n";
  const auto line = encode_request(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(decode_request(line), r);

  BackendRequest v;
  v.id = 1;
  v.audio_path = "a.wav";
  EXPECT_EQ(decode_request(encode_request(v)), v);
}

TEST(Protocol, ResponseRoundTrip) {
  const auto vad = vad_response();
  EXPECT_EQ(std::get<BackendResponse>(decode_response(encode_response(vad))), vad);

  BackendResponse tr{8, Op::Transcribe, Transcription{"Υπότιτλοι", "el"}};
  EXPECT_EQ(std::get<BackendResponse>(decode_response(encode_response(tr))), tr);

  BackendResponse al{9, Op::Align, std::vector<WordTiming>{{"α", 0.0, 0.5, 0.9}, {"β", 0.5, 1.0, 1.0}}};
  EXPECT_EQ(std::get<BackendResponse>(decode_response(encode_response(al))), al);

  BackendFailure f{10, "BackendRejected", "bad\nthing"};
  EXPECT_EQ(std::get<BackendFailure>(decode_response(encode_failure(f))), f);
}

TEST(Protocol, MalformedLinesAreProtocolViolations) {
  const std::vector<std::string> bad = {
      "",
      "not json",
      "[1,2,3]",
      R"({"protocol_version":2,"id":1,"op":"VAD","ok":true,"vad":{"frame_hop_s":0.01,"audio_duration_s":0,"scores":[]}})",
      R"({"id":1,"op":"VAD","ok":true})",
      R"({"protocol_version":1,"op":"TRANSCRIBE","ok":true,"transcript":"x","language":"el"})",
      R"({"protocol_version":1,"id":-1,"op":"TRANSCRIBE","ok":true,"transcript":"x","language":"el"})",
      R"({"protocol_version":1,"id":1,"op":"DANCE","ok":true})",
      R"({"protocol_version":1,"id":1,"op":"TRANSCRIBE","ok":true,"transcript":5,"language":"el"})",
      R"({"protocol_version":1,"id":1,"op":"VAD","ok":true,"vad":{"frame_hop_s":0.01,"audio_duration_s":0.05,"scores":[0.1]}})",
      R"({"protocol_version":1,"id":1,"op":"VAD","ok":true,"vad":{"frame_hop_s":0.01,"audio_duration_s":0.01,"scores":[1.5]}})",
      R"({"protocol_version":1,"id":1,"op":"ALIGN","ok":true,"words":[{"word":"a","start_s":1,"end_s":1,"confidence":1}]})",
      R"({"protocol_version":1,"id":1,"op":"ALIGN","ok":true,"words":[{"word":"a","start_s":1,"end_s":2,"confidence":1.2}]})",
      R"({"protocol_version":1,"id":1,"op":"ALIGN","ok":true,"words":[{"word":"a","start_s":1,"end_s":2,"confidence":1},{"word":"b","start_s":0.5,"end_s":2,"confidence":1}]})",
      R"({"protocol_version":1,"id":1,"ok":false})",
      R"({"protocol_version":1,"id":1,"ok":false,"error":{"code":"X"}})",
  };
  for (const auto& line : bad)
    EXPECT_EQ(code_of([&] { decode_response(line); }), ErrorCode::ProtocolViolation) << line;

  EXPECT_EQ(code_of([] { decode_handshake(R"({"type":"hi","protocol_version":1,"capabilities":[],"version":""})"); }),
            ErrorCode::ProtocolViolation);
  EXPECT_EQ(
      code_of([] { decode_handshake(R"({"type":"hello","protocol_version":1,"capabilities":["SING"],"version":""})"); }),
      ErrorCode::ProtocolViolation);
  EXPECT_EQ(code_of([] { decode_request(R"({"protocol_version":1,"id":1,"op":"VAD","audio_path":"a","language":"el","span":[1]})"); }),
            ErrorCode::ProtocolViolation);
  EXPECT_EQ(code_of([] { decode_request("{\"a\":1}\n{\"b\":2}"); }), ErrorCode::ProtocolViolation);
}

TEST(Protocol, RequestValidationHappensBeforeTheWire) {
  BackendRequest r;
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::PreconditionViolation);
  r.audio_path = "a.wav";
  r.span = TimeSpan{2.0, 1.0};
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::PreconditionViolation);
  r.span.reset();
  r.op = Op::Align;
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::PreconditionViolation);
}

TEST(Protocol, GoldenExchangesDecode) {
  const auto lines = split_lines(read_file(std::filesystem::path(CFTEST_FIXTURE_DIR) / "protocol" / "golden_exchanges.jsonl"));
  ASSERT_EQ(lines.size(), 101u);
  const auto hello = decode_handshake(Json::parse(lines[0])["handshake"].get<std::string>());
  EXPECT_EQ(hello.capabilities.size(), 3u);
  std::size_t failures = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto rec = Json::parse(lines[i]);
    const auto req_line = rec["request"].get<std::string>();
    const auto resp_line = rec["response"].get<std::string>();
    const auto req = decode_request(req_line);
    EXPECT_NO_THROW(req.validate());
    EXPECT_EQ(Json::parse(encode_request(req)), Json::parse(req_line));
    const auto outcome = decode_response(resp_line);
    if (const auto* f = std::get_if<BackendFailure>(&outcome)) {
      ++failures;
      EXPECT_EQ(f->id, req.id);
      EXPECT_EQ(Json::parse(encode_failure(*f)), Json::parse(resp_line));
      continue;
    }
    const auto& r = std::get<BackendResponse>(outcome);
    EXPECT_EQ(r.id, req.id);
    EXPECT_EQ(r.op, req.op);
    EXPECT_EQ(std::get<BackendResponse>(decode_response(encode_response(r))), r);
    if (r.op == Op::Align) {
      std::string joined;
      for (const auto& w : r.words()) joined += (joined.empty() ? "" : " ") + w.word;
      EXPECT_EQ(joined, *req.transcript);
    }
  }
  EXPECT_GT(failures, 0u);
}

class MockTest : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file_atomic(dir / "a.wav", cftest::speechlike_wav(12.0, 16000, 1, 1));
    write_file_atomic(dir / "b.wav", cftest::speechlike_wav(12.0, 16000, 1, 2));
  }
  BackendRequest req(Op op, const std::string& file, std::optional<TimeSpan> span = std::nullopt) {
    BackendRequest r;
    r.op = op;
    r.audio_path = dir / file;
    r.span = span;
    return r;
  }
  cftest::TempDir dir;
};

TEST_F(MockTest, VadTraceCoversAudio) {
  MockBackend m(1);
  const auto r = m.call(req(Op::Vad, "a.wav"));
  EXPECT_EQ(r.vad().scores.size(), 1200u);
  EXPECT_DOUBLE_EQ(r.vad().audio_duration_s, 12.0);
  EXPECT_NO_THROW(r.vad().validate());
  const auto s = m.call(req(Op::Vad, "a.wav", TimeSpan{2.0, 5.5}));
  EXPECT_EQ(s.vad().scores.size(), 350u);
}

TEST_F(MockTest, DeterministicPerSeedAndContent) {
  MockBackend m1(1), m1b(1), m2(2);
  const auto a = m1.call(req(Op::Transcribe, "a.wav", TimeSpan{0.0, 6.0}));
  EXPECT_EQ(a, m1b.call(req(Op::Transcribe, "a.wav", TimeSpan{0.0, 6.0})));
  EXPECT_NE(a.transcription(), m2.call(req(Op::Transcribe, "a.wav", TimeSpan{0.0, 6.0})).transcription());
  EXPECT_NE(a.transcription(), m1.call(req(Op::Transcribe, "b.wav", TimeSpan{0.0, 6.0})).transcription());
  // Same content under another name gives the same answer.
  std::filesystem::copy_file(dir / "a.wav", dir / "copy.wav");
  EXPECT_EQ(a.transcription(), m1.call(req(Op::Transcribe, "copy.wav", TimeSpan{0.0, 6.0})).transcription());
}

TEST_F(MockTest, TranscriptLengthTracksDuration) {
  MockBackend m(3);
  const auto r = m.call(req(Op::Transcribe, "a.wav", TimeSpan{0.0, 10.0}));
  const auto words = text::split_whitespace(r.transcription().transcript);
  if (r.transcription().transcript != "Υπότιτλοι AUTHORWAVE") {
    EXPECT_GE(words.size(), 22u);
    EXPECT_LE(words.size(), 26u);
  }
  EXPECT_EQ(r.transcription().language_tag, "el");
}

TEST_F(MockTest, AlignSpreadsWordsMonotonically) {
  MockBackend m(3);
  auto r = req(Op::Align, "a.wav", TimeSpan{2.0, 6.0});
  r.transcript = "ένα δύο τρία τέσσερα";
  const auto out = m.call(r);
  ASSERT_EQ(out.words().size(), 4u);
  EXPECT_DOUBLE_EQ(out.words()[0].start_s, 2.0);
  EXPECT_DOUBLE_EQ(out.words()[1].start_s, 3.0);
  EXPECT_DOUBLE_EQ(out.words()[3].end_s, 6.0);
  EXPECT_EQ(out.words()[2].word, "τρία");
}

TEST_F(MockTest, RejectsBadInput) {
  MockBackend m(1);
  EXPECT_EQ(code_of([&] { m.call(req(Op::Vad, "missing.wav")); }), ErrorCode::BackendRejected);
  EXPECT_EQ(code_of([&] { m.call(req(Op::Vad, "a.wav", TimeSpan{0.0, 13.0})); }), ErrorCode::BackendRejected);
  write_file_atomic(dir / "empty.wav", cftest::silent_wav(0.0));
  EXPECT_EQ(code_of([&] { m.call(req(Op::Vad, "empty.wav")); }), ErrorCode::BackendRejected);
}

TEST_F(MockTest, ServeSpeaksTheProtocol) {
  MockBackend m(5);
  auto r1 = req(Op::Transcribe, "a.wav", TimeSpan{0.0, 3.0});
  r1.id = 11;
  auto r2 = req(Op::Vad, "missing.wav");
  r2.id = 12;
  std::istringstream in(encode_request(r1) + "\n\n" + encode_request(r2) + "\nnot json\n");
  std::ostringstream out;
  EXPECT_EQ(serve(m, in, out), 3u);
  const auto lines = split_lines(out.str());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(decode_handshake(lines[0]), m.handshake());
  const auto a = std::get<BackendResponse>(decode_response(lines[1]));
  EXPECT_EQ(a.id, 11u);
  EXPECT_EQ(a.transcription(), m.call(r1).transcription());
  const auto b = std::get<BackendFailure>(decode_response(lines[2]));
  EXPECT_EQ(b.id, 12u);
  EXPECT_EQ(b.code, "BackendRejected");
  EXPECT_EQ(std::get<BackendFailure>(decode_response(lines[3])).code, "ProtocolViolation");
}

TEST(MakeBackend, MockSpecs) {
  EXPECT_EQ(make_backend("mock:17")->handshake().version, "corpusforge-mock/1 seed=17");
  EXPECT_THROW(make_backend("mock:"), Error);
  EXPECT_THROW(make_backend("mock:x1"), Error);
}
