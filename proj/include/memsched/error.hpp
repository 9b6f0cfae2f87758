#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memsched {

enum class ErrorCode {
  SyntaxError,
  UnknownOpcode,
  UndefinedData,
  DuplicateWriter,
  DuplicateOperation,
  UnknownOperation,
  InputOverwritten,
  UndefinedOutput,
  SelfDependency,
  CycleDetected,
  InfeasibleConstraint,
  UnknownBank,
  CapacityExceeded,
  UnmappedData,
  PortOverSubscribed,
  InvalidConfig,
  TimeConstraintViolated,
  MappingInfeasible,
  ClassMismatch,
  Infeasible,
  TooLarge,
  InconsistentSchedule,
  MismatchedInputs,
};

std::string_view to_string(ErrorCode code);

/// A single validation finding. `subject` holds the ids involved, formatted
/// for the `ERROR <code>: <subject>` diagnostic line.
struct Diagnostic {
  ErrorCode code;
  std::string subject;
  std::vector<std::string> ids;

  std::string format() const;
  bool operator==(const Diagnostic &) const = default;
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what,
        std::vector<std::string> ids = {})
      : std::runtime_error(what), code_(code), ids_(std::move(ids)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string> &ids() const noexcept { return ids_; }

private:
  ErrorCode code_;
  std::vector<std::string> ids_;
};

class SyntaxError : public Error {
public:
  SyntaxError(const std::string &what, std::size_t line, std::size_t column)
      : Error(ErrorCode::SyntaxError, what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// Raised when the list scheduler cannot fit every operation before the
/// time constraint. `ids()` lists the operations left unscheduled.
class TimeConstraintViolated : public Error {
public:
  TimeConstraintViolated(const std::string &what,
                         std::vector<std::string> unscheduled,
                         std::optional<int> suggested_constraint)
      : Error(ErrorCode::TimeConstraintViolated, what, std::move(unscheduled)),
        suggested_(suggested_constraint) {}

  std::optional<int> suggested_constraint() const noexcept {
    return suggested_;
  }

private:
  std::optional<int> suggested_;
};

} // namespace memsched
