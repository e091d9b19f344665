#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sononav {

enum class ErrorCode {
  InvalidArgument,
  InvalidInput,
  ProjectionDegenerate,
  IllConditioned,
  CollinearDegenerate,
  InvalidSampleRate,
  MalformedLog,
  MalformedPacket,
  BadQuaternion,
  UnknownTarget,
  VersionMismatch,
  ParseError,
  DegenerateVariance,
  LengthMismatch,
  NonBracketable,
  UnknownGroupingKey,
  EmptyInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::ProjectionDegenerate: return "projection-degenerate";
    case ErrorCode::IllConditioned: return "ill-conditioned";
    case ErrorCode::CollinearDegenerate: return "collinear-degenerate";
    case ErrorCode::InvalidSampleRate: return "invalid-sample-rate";
    case ErrorCode::MalformedLog: return "malformed-log";
    case ErrorCode::MalformedPacket: return "malformed-packet";
    case ErrorCode::BadQuaternion: return "bad-quaternion";
    case ErrorCode::UnknownTarget: return "unknown-target";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::DegenerateVariance: return "degenerate-variance";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::NonBracketable: return "non-bracketable";
    case ErrorCode::UnknownGroupingKey: return "unknown-grouping-key";
    case ErrorCode::EmptyInput: return "empty-input";
  }
  return "unknown";
}

/// All library failures are reported through this type; `code()` identifies
/// the failure class so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sononav
