#include <cmath>

#include "corpusforge/backend.hpp"
#include "corpusforge/error.hpp"
#include "jsonl.hpp"

namespace corpusforge::backend {

using jsonl::Json;

std::string_view to_string(Op op) {
  switch (op) {
    case Op::Vad: return "VAD";
    case Op::Transcribe: return "TRANSCRIBE";
    case Op::Align: return "ALIGN";
  }
  return "VAD";
}

std::optional<Op> op_from_string(std::string_view text) {
  if (text == "VAD") return Op::Vad;
  if (text == "TRANSCRIBE") return Op::Transcribe;
  if (text == "ALIGN") return Op::Align;
  return std::nullopt;
}

void BackendRequest::validate() const {
  require(!audio_path.empty(), "audio_path is empty");
  if (span) {
    require(span->start_s >= 0.0 && span->start_s < span->end_s, "span must satisfy 0 <= start < end");
  }
  if (op == Op::Align) require(transcript.has_value(), "ALIGN request needs a transcript");
}

bool operator==(const BackendResponse& a, const BackendResponse& b) {
  return a.id == b.id && a.op == b.op && a.payload == b.payload;
}

bool Handshake::supports(Op op) const {
  for (auto c : capabilities)
    if (c == op) return true;
  return false;
}

namespace {

[[noreturn]] void violation(const std::string& what) { raise(ErrorCode::ProtocolViolation, what); }

Json parse_line(std::string_view line) {
  if (line.find('\n') != std::string_view::npos) violation("embedded newline");
  try {
    auto j = Json::parse(line);
    if (!j.is_object()) violation("line is not a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    violation(std::string("unparseable line: ") + e.what());
  }
}

template <typename T>
T field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) violation(std::string("missing field '") + key + "'");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    violation(std::string("field '") + key + "' has the wrong type");
  }
}

std::uint64_t field_id(const Json& j) {
  auto it = j.find("id");
  if (it == j.end()) violation("missing field 'id'");
  if (!it->is_number_unsigned()) violation("field 'id' must be a nonnegative integer");
  return it->get<std::uint64_t>();
}

void check_version(const Json& j) {
  const auto v = field<int>(j, "protocol_version");
  if (v != kProtocolVersion) violation("unsupported protocol_version " + std::to_string(v));
}

Op field_op(const Json& j) {
  const auto op = op_from_string(field<std::string>(j, "op"));
  if (!op) violation("unknown op");
  return *op;
}

double finite(double v, const char* what) {
  if (!std::isfinite(v)) violation(std::string(what) + " is not finite");
  return v;
}

std::string dump(const Json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace); }

}  // namespace

std::string encode_handshake(const Handshake& h) {
  Json j;
  j["type"] = "hello";
  j["protocol_version"] = h.protocol_version;
  Json caps = Json::array();
  for (auto op : h.capabilities) caps.push_back(std::string(to_string(op)));
  j["capabilities"] = std::move(caps);
  j["version"] = h.version;
  return dump(j);
}

Handshake decode_handshake(std::string_view line) {
  const auto j = parse_line(line);
  if (field<std::string>(j, "type") != "hello") violation("first line is not a hello record");
  check_version(j);
  Handshake h;
  h.protocol_version = kProtocolVersion;
  h.version = field<std::string>(j, "version");
  for (const auto& c : field<std::vector<std::string>>(j, "capabilities")) {
    const auto op = op_from_string(c);
    if (!op) violation("unknown capability '" + c + "'");
    h.capabilities.push_back(*op);
  }
  return h;
}

std::string encode_request(const BackendRequest& r) {
  Json j;
  j["protocol_version"] = kProtocolVersion;
  j["id"] = r.id;
  j["op"] = std::string(to_string(r.op));
  j["audio_path"] = r.audio_path.string();
  j["span"] = r.span ? Json::array({r.span->start_s, r.span->end_s}) : Json(nullptr);
  j["language"] = r.language_tag;
  j["transcript"] = jsonl::opt(r.transcript);
  return dump(j);
}

BackendRequest decode_request(std::string_view line) {
  const auto j = parse_line(line);
  check_version(j);
  BackendRequest r;
  r.id = field_id(j);
  r.op = field_op(j);
  r.audio_path = field<std::string>(j, "audio_path");
  r.language_tag = field<std::string>(j, "language");
  if (auto it = j.find("span"); it != j.end() && !it->is_null()) {
    const auto pair = field<std::vector<double>>(j, "span");
    if (pair.size() != 2) violation("span must be [start_s, end_s]");
    r.span = TimeSpan{finite(pair[0], "span start"), finite(pair[1], "span end")};
  }
  if (auto it = j.find("transcript"); it != j.end() && !it->is_null()) r.transcript = field<std::string>(j, "transcript");
  return r;
}

std::string encode_response(const BackendResponse& r) {
  Json j;
  j["protocol_version"] = kProtocolVersion;
  j["id"] = r.id;
  j["op"] = std::string(to_string(r.op));
  j["ok"] = true;
  switch (r.op) {
    case Op::Vad: {
      const auto& t = r.vad();
      j["vad"] = Json{{"frame_hop_s", t.frame_hop_s}, {"audio_duration_s", t.audio_duration_s}, {"scores", t.scores}};
      break;
    }
    case Op::Transcribe:
      j["transcript"] = r.transcription().transcript;
      j["language"] = r.transcription().language_tag;
      break;
    case Op::Align: {
      Json words = Json::array();
      for (const auto& w : r.words())
        words.push_back(Json{{"word", w.word}, {"start_s", w.start_s}, {"end_s", w.end_s}, {"confidence", w.confidence}});
      j["words"] = std::move(words);
      break;
    }
  }
  return dump(j);
}

std::string encode_failure(const BackendFailure& f) {
  Json j;
  j["protocol_version"] = kProtocolVersion;
  j["id"] = f.id;
  j["ok"] = false;
  j["error"] = Json{{"code", f.code}, {"message", f.message}};
  return dump(j);
}

std::variant<BackendResponse, BackendFailure> decode_response(std::string_view line) {
  const auto j = parse_line(line);
  check_version(j);
  const auto id = field_id(j);
  if (!field<bool>(j, "ok")) {
    const auto err = field<Json>(j, "error");
    return BackendFailure{id, field<std::string>(err, "code"), field<std::string>(err, "message")};
  }
  BackendResponse r;
  r.id = id;
  r.op = field_op(j);
  switch (r.op) {
    case Op::Vad: {
      const auto v = field<Json>(j, "vad");
      segment::VadTrace t;
      t.frame_hop_s = finite(field<double>(v, "frame_hop_s"), "frame_hop_s");
      t.audio_duration_s = finite(field<double>(v, "audio_duration_s"), "audio_duration_s");
      t.scores = field<std::vector<double>>(v, "scores");
      try {
        t.validate();
      } catch (const Error& e) {
        violation(std::string("invalid VAD trace: ") + e.what());
      }
      r.payload = std::move(t);
      break;
    }
    case Op::Transcribe:
      r.payload = Transcription{field<std::string>(j, "transcript"), field<std::string>(j, "language")};
      break;
    case Op::Align: {
      std::vector<WordTiming> words;
      for (const auto& w : field<Json>(j, "words")) {
        WordTiming wt{field<std::string>(w, "word"), finite(field<double>(w, "start_s"), "start_s"),
                      finite(field<double>(w, "end_s"), "end_s"), finite(field<double>(w, "confidence"), "confidence")};
        if (!(wt.start_s < wt.end_s)) violation("word timing with start >= end");
        if (wt.confidence < 0.0 || wt.confidence > 1.0) violation("confidence outside [0, 1]");
        if (!words.empty() && wt.start_s < words.back().start_s) violation("word timings not ordered by start");
        words.push_back(std::move(wt));
      }
      r.payload = std::move(words);
      break;
    }
  }
  return r;
}

}  // namespace corpusforge::backend
