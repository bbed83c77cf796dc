#pragma once

// Conversions at the service boundary. Units there: pressure bar,
// temperature C, temperature differences K, enthalpy kJ/kg, entropy
// kJ/(kg K), heat flows and power kW. Mass flows stay kg/s, valve area m2,
// compressor speed rev/min.

#include <optional>

#include <json.hpp>

#include "idoe/cycle_sim.hpp"
#include "idoe/cycle_spec.hpp"
#include "idoe/diagram.hpp"
#include "idoe/doe.hpp"
#include "idoe/hull.hpp"

namespace idoe::api {

using nlohmann::json;

inline constexpr double kPaPerBar = 1e5;
inline constexpr double kKelvinOffset = 273.15;

/// Finite numbers as-is, NaN and infinities as null.
json number(double v);

json point_json(const CharPoint& p);
json params_json(const ControlParams& p);
ControlParams params_from(const json& j);

json spec_json(const CycleSpecification& s);
/// Reads {p_low, p_high (bar), subcooling, superheat (K), eta_isentropic?}.
CycleSpecification spec_from(const json& j);

json box_json(const ParameterBox& box);
ParameterBox box_from(const json& j);

json result_json(const CycleResult& r);
json run_json(const Run& r);
json summary_json(const Summary& s, Output o);
json statistics_json(const std::vector<std::pair<Output, Summary>>& stats);

json geometry_json(const CycleGeometry& g);
json assessment_json(const SpecificAssessment& a);
json iteration_json(const IterationRecord& r);
json finding_json(const Finding& f);
Finding finding_from(const json& j);

json diagram_json(const DiagramPayload& d);
json polygon_json(const ConvexPolygon& poly);

/// Number field with a default when absent; throws SchemaMismatch when the
/// field is present but not a number.
double field(const json& j, const char* key, std::optional<double> fallback = std::nullopt);

}  // namespace idoe::api
