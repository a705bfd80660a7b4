#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lifestate {

enum class ErrorCode {
  // interpreter
  UnboundVariable,
  DanglingHandle,
  TypeMismatch,
  StepLimit,
  // trace files
  MalformedRecord,
  UnbalancedNesting,
  DanglingMsgId,
  EventWithoutCallback,
  // rule files and checking
  ParseError,
  InitProhibit,
  EmptyTestSet,
  // miners
  UnknownSignature,
  VariableBudgetExceeded,
  // pipeline
  TooFewTraces,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Budget errors map to exit code 3 in the CLI, everything else to 2.
bool is_budget_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lifestate
