#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idoe/calibration.hpp"
#include "idoe/workbench.hpp"

namespace idoe {

struct ReplayStep {
  std::string name;
  CycleSpecification spec;
  std::size_t runs = 20;
  double fraction = 0.05;
};

/// Scripted scenario: session setup, a baseline and an ordered list of
/// iteration specifications. Script documents use the service units.
struct ReplayScript {
  std::string name = "use case";
  SessionOptions session;
  CycleSpecification baseline_spec;
  std::optional<ControlParams> baseline_params;  // empty: found by calibration
  std::vector<ReplayStep> steps;
};

/// Throws ScriptSchema on malformed documents. Spec values are not checked
/// here; an infeasible step fails on its own during replay.
ReplayScript parse_script(const nlohmann::json& doc);

/// Runs create -> propose -> refine for every step and returns the
/// transcript. Step failures are recorded and the replay moves on.
nlohmann::json replay_usecase(const ReplayScript& script, Workbench& workbench);
nlohmann::json replay_usecase(const nlohmann::json& doc, Workbench& workbench);

}  // namespace idoe
