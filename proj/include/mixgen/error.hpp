#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixgen {

enum class ErrorCode {
  InvalidLambda,
  InvalidMRatio,
  InvalidBetaParams,
  InvalidConfig,
  InvalidImage,
  ShapeMismatch,
  DimMismatch,
  SelfMix,
  MTooLarge,
  DatasetTooSmall,
  MalformedLine,
  DuplicateId,
  DestinationUnwritable,
  DecodeError,
  UnsupportedFormat,
  BadMagic,
  UnsupportedDtype,
  LengthMismatch,
  InconsistentGroundTruth,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// front ends (CLI, bindings) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mixgen
