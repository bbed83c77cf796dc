#include "idoe/json_io.hpp"

#include <cmath>

#include "idoe/error.hpp"

namespace idoe::api {

namespace {

double to_bar(double pa) { return pa / kPaPerBar; }
double to_celsius(double k) { return k - kKelvinOffset; }
double to_kj(double j) { return j / 1000.0; }

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::subcooled: return "subcooled";
    case Phase::saturated: return "saturated";
    case Phase::superheated: return "superheated";
  }
  return "saturated";
}

std::string_view unit_of(Output o) {
  switch (o) {
    case Output::cop: return "-";
    case Output::w:
    case Output::dh_e:
    case Output::dh_c: return "kW";
    case Output::t_subcooling:
    case Output::t_superheating: return "K";
    case Output::m_dot: return "kg/s";
    case Output::p_low:
    case Output::p_high: return "bar";
  }
  return "-";
}

double boundary_value(Output o, double si) {
  switch (o) {
    case Output::w:
    case Output::dh_e:
    case Output::dh_c: return si / 1000.0;
    case Output::p_low:
    case Output::p_high: return to_bar(si);
    default: return si;
  }
}

}  // namespace

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double field(const json& j, const char* key, std::optional<double> fallback) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaMismatch, "expected a JSON object");
  if (!j.contains(key) || j.at(key).is_null()) {
    if (fallback) return *fallback;
    throw Error(ErrorKind::SchemaMismatch, std::string("missing field '") + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::SchemaMismatch, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

json point_json(const CharPoint& p) {
  return {{"p", number(to_bar(p.pressure))},
          {"h", number(to_kj(p.enthalpy))},
          {"t", number(to_celsius(p.temperature))},
          {"s", number(to_kj(p.entropy))},
          {"quality", p.quality ? number(*p.quality) : json(nullptr)},
          {"density", number(p.density)},
          {"phase", std::isfinite(p.pressure) ? json(phase_name(p.phase)) : json(nullptr)}};
}

json params_json(const ControlParams& p) {
  return {{"n_pump", p.n_pump},
          {"mf_air_cond", p.mf_air_cond},
          {"t_air_cabin", to_celsius(p.t_air_cabin)},
          {"mf_air_evap", p.mf_air_evap},
          {"a_eff_valve", p.a_eff_valve}};
}

ControlParams params_from(const json& j) {
  return {field(j, "n_pump"), field(j, "mf_air_cond"), field(j, "t_air_cabin") + kKelvinOffset, field(j, "mf_air_evap"),
          field(j, "a_eff_valve")};
}

json spec_json(const CycleSpecification& s) {
  return {{"p_low", to_bar(s.p_low)},
          {"p_high", to_bar(s.p_high)},
          {"subcooling", s.subcooling},
          {"superheat", s.superheat},
          {"eta_isentropic", s.eta_isentropic}};
}

CycleSpecification spec_from(const json& j) {
  CycleSpecification s;
  s.p_low = field(j, "p_low") * kPaPerBar;
  s.p_high = field(j, "p_high") * kPaPerBar;
  s.subcooling = field(j, "subcooling");
  s.superheat = field(j, "superheat");
  s.eta_isentropic = field(j, "eta_isentropic", kDefaultIsentropicEfficiency);
  return s;
}

json box_json(const ParameterBox& box) {
  json dims = json::array();
  for (std::size_t d = 0; d < box.dims.size(); ++d) {
    const auto& dim = box.dims[d];
    const bool temp = d == 2;
    dims.push_back({{"name", dim.name},
                    {"lower", temp ? to_celsius(dim.lower) : dim.lower},
                    {"upper", temp ? to_celsius(dim.upper) : dim.upper}});
  }
  return {{"dimensions", dims}};
}

ParameterBox box_from(const json& j) {
  json si = j;
  if (!si.is_object() || !si.contains("dimensions") || !si["dimensions"].is_array() || si["dimensions"].size() != 5) {
    throw Error(ErrorKind::InvalidBox, "a parameter box needs exactly five dimensions");
  }
  auto& cabin = si["dimensions"][2];
  cabin["lower"] = field(cabin, "lower") + kKelvinOffset;
  cabin["upper"] = field(cabin, "upper") + kKelvinOffset;
  return box_from_json(si);
}

json result_json(const CycleResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(point_json(p));
  return {{"points", pts},
          {"m_dot", number(r.m_dot)},
          {"cop", number(r.cop)},
          {"w", number(r.w / 1000.0)},
          {"dh_e", number(r.dh_e / 1000.0)},
          {"dh_c", number(r.dh_c / 1000.0)},
          {"t_subcooling", number(r.t_subcooling)},
          {"t_superheating", number(r.t_superheating)},
          {"valid", r.valid},
          {"status", to_string(r.status)},
          {"reason", r.reason}};
}

json run_json(const Run& r) {
  json j = result_json(r.result);
  j["id"] = r.id;
  j["params"] = params_json(r.params);
  j["provenance"] = to_string(r.provenance);
  j["iteration"] = r.iteration;
  return j;
}

json summary_json(const Summary& s, Output o) {
  return {{"output", to_string(o)},
          {"unit", unit_of(o)},
          {"count", s.count},
          {"min", number(boundary_value(o, s.min))},
          {"q1", number(boundary_value(o, s.q1))},
          {"median", number(boundary_value(o, s.median))},
          {"q3", number(boundary_value(o, s.q3))},
          {"max", number(boundary_value(o, s.max))},
          {"mean", number(boundary_value(o, s.mean))}};
}

json statistics_json(const std::vector<std::pair<Output, Summary>>& stats) {
  json out = json::object();
  for (const auto& [o, s] : stats) out[std::string(to_string(o))] = summary_json(s, o);
  return out;
}

json geometry_json(const CycleGeometry& g) {
  json pts = json::array();
  for (const auto& p : g.points) pts.push_back(point_json(p));
  return {{"points", pts},
          {"point_2s", point_json(g.point_2s)},
          {"sat_vapor_low", point_json(g.sat_vapor_low)},
          {"sat_vapor_high", point_json(g.sat_vapor_high)},
          {"sat_liquid_high", point_json(g.sat_liquid_high)},
          {"q_evap", number(to_kj(g.q_evap))},
          {"q_cond", number(to_kj(g.q_cond))},
          {"w_comp", number(to_kj(g.w_comp))},
          {"cop_specific", number(g.cop_specific)}};
}

json assessment_json(const SpecificAssessment& a) {
  return {{"q_evap", number(a.q_evap / 1000.0)},
          {"q_cond", number(a.q_cond / 1000.0)},
          {"w_comp", number(a.w_comp / 1000.0)},
          {"cop", number(a.cop)}};
}

json iteration_json(const IterationRecord& r) {
  return {{"id", r.id},
          {"name", r.name},
          {"spec", spec_json(r.spec)},
          {"predicted_params", params_json(r.predicted_params)},
          {"assessment", assessment_json(r.predicted_assessment)},
          {"center_run_id", r.center_run_id ? json(*r.center_run_id) : json(nullptr)},
          {"refinement_run_ids", r.refinement_run_ids},
          {"visible", r.visible},
          {"predicted_color", r.predicted_color},
          {"simulated_color", r.simulated_color},
          {"notes", r.notes}};
}

json finding_json(const Finding& f) { return to_json(f); }

Finding finding_from(const json& j) {
  try {
    return finding_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("malformed finding: ") + e.what());
  }
}

json diagram_json(const DiagramPayload& d) {
  json lines = json::array();
  for (const auto& line : d.lines) {
    json verts = json::array();
    for (const auto& v : line.vertices) verts.push_back({to_kj(v.enthalpy), to_bar(v.pressure)});
    double level = line.level;
    std::string unit = "-";
    if (line.family == "isotherm") {
      level = to_celsius(level);
      unit = "C";
    } else if (line.family == "isentrope") {
      level = to_kj(level);
      unit = "kJ/(kg K)";
    }
    lines.push_back({{"family", line.family}, {"level", level}, {"unit", unit}, {"vertices", verts}});
  }
  return {{"p_min", to_bar(d.p_min)}, {"p_max", to_bar(d.p_max)}, {"lines", lines}};
}

json polygon_json(const ConvexPolygon& poly) {
  // Hull vertices live in (h J/kg, log10 P Pa); emitted as [h kJ/kg, p bar].
  json verts = json::array();
  for (const auto& v : poly.vertices) verts.push_back({to_kj(v.x), to_bar(std::pow(10.0, v.y))});
  return verts;
}

}  // namespace idoe::api
