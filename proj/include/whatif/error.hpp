#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace whatif {

enum class ErrorCode {
  InvalidArgument,
  EmptyScenario,
  UnknownHypothetical,
  InvalidCount,
  NonPositiveWeight,
  EmptyScenarioResult,
  EmptyHypothetical,
  DegenerateHypothetical,
  DegenerateSample,
  NotDisjoint,
  SchemaMismatch,
  NonBooleanQuery,
  ParseError,
  NegationUnsupported,
  RecursionUnsupported,
  VersionMismatch,
  ChecksumMismatch,
  MalformedSection,
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

// Errors that come from turning a sketch into an answer (as opposed to bad input data).
inline bool is_extraction_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyScenario:
    case ErrorCode::UnknownHypothetical:
    case ErrorCode::EmptyScenarioResult:
    case ErrorCode::EmptyHypothetical:
    case ErrorCode::DegenerateSample:
      return true;
    default:
      return false;
  }
}

}  // namespace whatif
