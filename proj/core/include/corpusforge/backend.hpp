#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "corpusforge/segment.hpp"

namespace corpusforge::backend {

inline constexpr int kProtocolVersion = 1;

enum class Op { Vad, Transcribe, Align };

std::string_view to_string(Op op);
std::optional<Op> op_from_string(std::string_view text);

struct TimeSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  bool operator==(const TimeSpan&) const = default;
};

struct BackendRequest {
  std::uint64_t id = 0;  // assigned by the adapter
  Op op = Op::Vad;
  std::filesystem::path audio_path;
  std::optional<TimeSpan> span;
  std::string language_tag = "el";
  std::optional<std::string> transcript;  // required for Align

  /// Throws PreconditionViolation.
  void validate() const;
  bool operator==(const BackendRequest&) const = default;
};

struct WordTiming {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
  double confidence = 1.0;
  bool operator==(const WordTiming&) const = default;
};

struct Transcription {
  std::string transcript;
  std::string language_tag;
  bool operator==(const Transcription&) const = default;
};

using Payload = std::variant<segment::VadTrace, Transcription, std::vector<WordTiming>>;

struct BackendResponse {
  std::uint64_t id = 0;
  Op op = Op::Vad;
  Payload payload;

  const segment::VadTrace& vad() const { return std::get<segment::VadTrace>(payload); }
  const Transcription& transcription() const { return std::get<Transcription>(payload); }
  const std::vector<WordTiming>& words() const { return std::get<std::vector<WordTiming>>(payload); }
};

bool operator==(const BackendResponse& a, const BackendResponse& b);

struct BackendFailure {
  std::uint64_t id = 0;
  std::string code;
  std::string message;
  bool operator==(const BackendFailure&) const = default;
};

struct Handshake {
  int protocol_version = kProtocolVersion;
  std::vector<Op> capabilities;
  std::string version;

  bool supports(Op op) const;
  bool operator==(const Handshake&) const = default;
};

// Wire encoding: one JSON object per line, no embedded newlines.
// See docs/backend-protocol.md.
std::string encode_handshake(const Handshake& h);
std::string encode_request(const BackendRequest& r);
std::string encode_response(const BackendResponse& r);
std::string encode_failure(const BackendFailure& f);

/// All decoders throw Error(ProtocolViolation) on malformed input.
Handshake decode_handshake(std::string_view line);
BackendRequest decode_request(std::string_view line);
/// A response line is either a payload or a failure.
std::variant<BackendResponse, BackendFailure> decode_response(std::string_view line);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual const Handshake& handshake() const = 0;
  /// Errors: PreconditionViolation (before any wire traffic), BackendTimeout,
  /// BackendCrashed, ProtocolViolation, BackendRejected.
  virtual BackendResponse call(BackendRequest request) = 0;
};

/// Deterministic in-process backend. Outputs are keyed by (seed, PCM digest
/// of the audio, span): VAD is a seeded speech/pause process at 10 ms hop,
/// TRANSCRIBE draws Greek words (~2.2 per second), ALIGN spreads the
/// transcript's words uniformly over the span.
class MockBackend final : public Backend {
 public:
  static constexpr double kFrameHop = 0.01;

  explicit MockBackend(std::uint64_t seed);
  const Handshake& handshake() const override { return handshake_; }
  BackendResponse call(BackendRequest request) override;

 private:
  std::uint64_t seed_;
  Handshake handshake_;
};

std::unique_ptr<Backend> mock_backend(std::uint64_t seed);

struct SubprocessOptions {
  std::chrono::milliseconds call_timeout{120000};
  std::chrono::milliseconds startup_timeout{30000};
  bool restart_on_crash = true;
};

/// Runs `/bin/sh -c <command>` and speaks the protocol over its stdin/stdout.
/// Writes are serialized; a reader thread routes responses to callers by id.
class SubprocessBackend final : public Backend {
 public:
  explicit SubprocessBackend(std::string command, SubprocessOptions options = {});
  ~SubprocessBackend() override;
  SubprocessBackend(const SubprocessBackend&) = delete;
  SubprocessBackend& operator=(const SubprocessBackend&) = delete;

  const Handshake& handshake() const override;
  BackendResponse call(BackendRequest request) override;

  bool alive() const;
  void restart();
  std::size_t restarts() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "mock:<seed>" selects MockBackend; anything else is a shell command.
std::unique_ptr<Backend> make_backend(const std::string& spec, SubprocessOptions options = {});

/// Serves the protocol for `backend` on a line stream: handshake first, then
/// one response line per request line until EOF. Returns the number of
/// requests served.
std::size_t serve(Backend& backend, std::istream& in, std::ostream& out);

}  // namespace corpusforge::backend
