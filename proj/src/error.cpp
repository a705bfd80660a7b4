#include "lifestate/error.hpp"

namespace lifestate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::DanglingHandle: return "DanglingHandle";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::StepLimit: return "StepLimit";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnbalancedNesting: return "UnbalancedNesting";
    case ErrorCode::DanglingMsgId: return "DanglingMsgId";
    case ErrorCode::EventWithoutCallback: return "EventWithoutCallback";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InitProhibit: return "InitProhibit";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::UnknownSignature: return "UnknownSignature";
    case ErrorCode::VariableBudgetExceeded: return "VariableBudgetExceeded";
    case ErrorCode::TooFewTraces: return "TooFewTraces";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_budget_error(ErrorCode code) {
  return code == ErrorCode::StepLimit || code == ErrorCode::VariableBudgetExceeded;
}

}  // namespace lifestate
