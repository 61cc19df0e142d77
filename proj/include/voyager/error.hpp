#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voyager {

enum class ErrorCode {
  DegenerateCandidate,
  ColinearSelection,
  NoAffectedDims,
  MissingLabels,
  DegenerateData,
  PathTooShort,
  ParseError,
  TooFewDims,
  InvalidArgument,
  UnknownOp,
  NotFound,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateCandidate: return "DegenerateCandidate";
    case ErrorCode::ColinearSelection: return "ColinearSelection";
    case ErrorCode::NoAffectedDims: return "NoAffectedDims";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooFewDims: return "TooFewDims";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownOp: return "UnknownOp";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the engine carries a machine-readable code so the
/// wire protocol can forward it unchanged.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace voyager
