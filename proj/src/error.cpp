#include "idoe/error.hpp"

namespace idoe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotSuperheated: return "NotSuperheated";
    case ErrorKind::NotSubcooled: return "NotSubcooled";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::MalformedGeometry: return "MalformedGeometry";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::InvalidBox: return "InvalidBox";
    case ErrorKind::InvalidCenter: return "InvalidCenter";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::NotTrained: return "NotTrained";
    case ErrorKind::InvalidCycle: return "InvalidCycle";
    case ErrorKind::JobAlreadyRunning: return "JobAlreadyRunning";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::ScriptSchema: return "ScriptSchema";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace idoe
