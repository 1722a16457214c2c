#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwap {

enum class ErrorCode {
  MalformedRow,
  DuplicatePlayerTask,
  ControlWithoutTruth,
  UnknownCategory,
  UncoveredTimestamp,
  OverlappingPeriods,
  InvalidConfig,
  RoundSpanExceeded,
  InvalidRound,
  ZeroPlayTime,
  NoUsers,
  UnknownPlayer,
  TooFewPlayers,
  DegenerateFeature,
  TooFewPoints,
  SingleCluster,
  DegenerateSample,
  InfeasibleConfig,
  EmptyPopulation,
  EmptyLog,
  IoFailure,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicatePlayerTask: return "DuplicatePlayerTask";
    case ErrorCode::ControlWithoutTruth: return "ControlWithoutTruth";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::UncoveredTimestamp: return "UncoveredTimestamp";
    case ErrorCode::OverlappingPeriods: return "OverlappingPeriods";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::RoundSpanExceeded: return "RoundSpanExceeded";
    case ErrorCode::InvalidRound: return "InvalidRound";
    case ErrorCode::ZeroPlayTime: return "ZeroPlayTime";
    case ErrorCode::NoUsers: return "NoUsers";
    case ErrorCode::UnknownPlayer: return "UnknownPlayer";
    case ErrorCode::TooFewPlayers: return "TooFewPlayers";
    case ErrorCode::DegenerateFeature: return "DegenerateFeature";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gwap
