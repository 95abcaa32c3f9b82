#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corpusforge {

enum class ErrorCode {
  PreconditionViolation,
  // feeds
  MalformedFeed,
  UnsupportedFeedFormat,
  EmptyFeed,
  AllSourcesFailed,
  // ingest
  FetchFailed,
  ChecksumMismatch,
  UndecodableMedia,
  ZeroLengthAudio,
  // segment
  UncuttableRegion,
  // backend
  BackendTimeout,
  BackendCrashed,
  ProtocolViolation,
  BackendRejected,  // well-formed error response from the backend
  // corpus
  InsufficientCategoryData,
  // pipeline
  ConfigInvalid,
  StageFailed,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) raise(ErrorCode::PreconditionViolation, message);
}

}  // namespace corpusforge
