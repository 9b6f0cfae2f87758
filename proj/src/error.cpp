#include "memsched/error.hpp"

namespace memsched {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::UnknownOpcode: return "UnknownOpcode";
  case ErrorCode::UndefinedData: return "UndefinedData";
  case ErrorCode::DuplicateWriter: return "DuplicateWriter";
  case ErrorCode::DuplicateOperation: return "DuplicateOperation";
  case ErrorCode::UnknownOperation: return "UnknownOperation";
  case ErrorCode::InputOverwritten: return "InputOverwritten";
  case ErrorCode::UndefinedOutput: return "UndefinedOutput";
  case ErrorCode::SelfDependency: return "SelfDependency";
  case ErrorCode::CycleDetected: return "CycleDetected";
  case ErrorCode::InfeasibleConstraint: return "InfeasibleConstraint";
  case ErrorCode::UnknownBank: return "UnknownBank";
  case ErrorCode::CapacityExceeded: return "CapacityExceeded";
  case ErrorCode::UnmappedData: return "UnmappedData";
  case ErrorCode::PortOverSubscribed: return "PortOverSubscribed";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::TimeConstraintViolated: return "TimeConstraintViolated";
  case ErrorCode::MappingInfeasible: return "MappingInfeasible";
  case ErrorCode::ClassMismatch: return "ClassMismatch";
  case ErrorCode::Infeasible: return "Infeasible";
  case ErrorCode::TooLarge: return "TooLarge";
  case ErrorCode::InconsistentSchedule: return "InconsistentSchedule";
  case ErrorCode::MismatchedInputs: return "MismatchedInputs";
  }
  return "Unknown";
}

std::string Diagnostic::format() const {
  std::string line = "ERROR ";
  line += to_string(code);
  line += ": ";
  line += subject;
  return line;
}

} // namespace memsched
