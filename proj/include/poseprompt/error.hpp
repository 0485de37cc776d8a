#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poseprompt {

enum class ErrorCode {
  InvalidArgument,
  CountSumMismatch,
  MalformedRleString,
  DegeneratePolygon,
  DimsMismatch,
  EmptyAfterClamp,
  EmptyMask,
  FieldAbsent,
  NoKeypointsAvailable,
  NoCandidates,
  EmptyGtMask,
  NothingToSample,
  ProtocolError,
  Timeout,
  PeerClosed,
  ParseError,
  SchemaError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace poseprompt
