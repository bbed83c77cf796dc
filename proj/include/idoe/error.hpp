#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idoe {

enum class ErrorKind {
  InvalidArgument,
  OutOfRange,
  NotSuperheated,
  NotSubcooled,
  NoSolution,
  InfeasibleSpec,
  MalformedGeometry,
  Degenerate,
  NoConvergence,
  Infeasible,
  InvalidBox,
  InvalidCenter,
  LengthMismatch,
  EmptySelection,
  SchemaMismatch,
  DatasetTooSmall,
  NonFiniteLoss,
  NotTrained,
  InvalidCycle,
  JobAlreadyRunning,
  NotFound,
  ScriptSchema,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception; `kind()` lets callers (and the HTTP layer) branch
/// on the failure category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace idoe
