#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polyrad {

enum class ErrorCode {
  InvalidArgument,
  ExtinctState,
  NonConstantLambda,
  OutOfRange,
  WrongSpec,
  NonDecayingIntegrand,
  NotSettled,
  NotApplicable,
  SingularDiagonal,
  NonIntegrableTail,
  TailDominates,
  BracketInvalid,
  NoLinearWindow,
  MassNotConverged,
  HypothesisViolated,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the library reports by throwing carries one of the codes
/// above so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polyrad
