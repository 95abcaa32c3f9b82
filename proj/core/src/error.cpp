#include "corpusforge/error.hpp"

namespace corpusforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::MalformedFeed: return "MalformedFeed";
    case ErrorCode::UnsupportedFeedFormat: return "UnsupportedFeedFormat";
    case ErrorCode::EmptyFeed: return "EmptyFeed";
    case ErrorCode::AllSourcesFailed: return "AllSourcesFailed";
    case ErrorCode::FetchFailed: return "FetchFailed";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::UndecodableMedia: return "UndecodableMedia";
    case ErrorCode::ZeroLengthAudio: return "ZeroLengthAudio";
    case ErrorCode::UncuttableRegion: return "UncuttableRegion";
    case ErrorCode::BackendTimeout: return "BackendTimeout";
    case ErrorCode::BackendCrashed: return "BackendCrashed";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::BackendRejected: return "BackendRejected";
    case ErrorCode::InsufficientCategoryData: return "InsufficientCategoryData";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StageFailed: return "StageFailed";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace corpusforge
