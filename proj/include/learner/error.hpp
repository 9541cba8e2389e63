#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace learner {

enum class ErrorCode {
  RankOutOfRange,
  NonFiniteInput,
  RankDeficient,
  DimensionMismatch,
  EmptyRowOrColumn,
  EmptyObservationSet,
  TooFewObservations,
  EmptyHoldout,
  RankZeroSelected,
  InvalidCorrelation,
  NotOrthonormal,
  IndexOutOfRange,
  InvalidArgument,
  ParseError,
  RaggedRows,
  AllMissing,
  EmptyMatrix,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyRowOrColumn: return "EmptyRowOrColumn";
    case ErrorCode::EmptyObservationSet: return "EmptyObservationSet";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::EmptyHoldout: return "EmptyHoldout";
    case ErrorCode::RankZeroSelected: return "RankZeroSelected";
    case ErrorCode::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace learner
