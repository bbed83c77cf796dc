#include "idoe/cycle_spec.hpp"

#include <cmath>
#include <string>

#include "idoe/error.hpp"

namespace idoe {

namespace {

void validate(const RefrigerantModel& model, const CycleSpecification& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InfeasibleSpec, what); };
  if (!(std::isfinite(spec.p_low) && std::isfinite(spec.p_high) && std::isfinite(spec.subcooling) &&
        std::isfinite(spec.superheat) && std::isfinite(spec.eta_isentropic)))
    fail("specification contains non-finite values");
  if (!(spec.p_low < spec.p_high)) fail("low pressure must be below high pressure");
  if (spec.p_low < model.p_min() || spec.p_high > model.p_max())
    fail("pressures outside the refrigerant saturation range");
  if (spec.subcooling < 0.0 || spec.superheat < 0.0) fail("subcooling and superheat must be non-negative");
  if (!(spec.eta_isentropic > 0.0 && spec.eta_isentropic <= 1.0))
    fail("isentropic efficiency must lie in (0, 1]");
}

}  // namespace

CycleGeometry build_cycle(const RefrigerantModel& model, const CycleSpecification& spec) {
  validate(model, spec);
  try {
    CycleGeometry g;
    const double t_low = model.saturation_temperature(spec.p_low);
    const double t_high = model.saturation_temperature(spec.p_high);

    g.sat_vapor_low = model.superheated_state(spec.p_low, t_low);
    g.sat_vapor_high = model.superheated_state(spec.p_high, t_high);
    g.sat_liquid_high = model.subcooled_state(spec.p_high, t_high);

    auto& [p1, p2, p3, p4] = g.points;
    p1 = model.superheated_state(spec.p_low, t_low + spec.superheat);
    g.point_2s = model.isentropic_compression(p1, spec.p_high);
    if (spec.eta_isentropic == 1.0) {
      p2 = g.point_2s;
    } else {
      const double h2 = p1.enthalpy + (g.point_2s.enthalpy - p1.enthalpy) / spec.eta_isentropic;
      p2 = model.state_from_ph(spec.p_high, h2);
    }
    p3 = model.subcooled_state(spec.p_high, t_high - spec.subcooling);
    p4 = model.state_from_ph(spec.p_low, p3.enthalpy);

    g.q_evap = p1.enthalpy - p4.enthalpy;
    g.w_comp = p2.enthalpy - p1.enthalpy;
    g.q_cond = p2.enthalpy - p3.enthalpy;
    g.cop_specific = g.q_evap / g.w_comp;
    return g;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InfeasibleSpec) throw;
    throw Error(ErrorKind::InfeasibleSpec, std::string("cycle cannot be constructed: ") + e.what());
  }
}

CycleSpecification extract_spec(const RefrigerantModel& model, const std::array<CharPoint, 4>& points) {
  const auto& [p1, p2, p3, p4] = points;
  auto fail = [](const std::string& what) { throw Error(ErrorKind::MalformedGeometry, what); };
  if (p4.enthalpy != p3.enthalpy) fail("expansion is not isenthalpic (h4 != h3)");
  if (p1.pressure != p4.pressure) fail("points 1 and 4 do not share the low pressure");
  if (p2.pressure != p3.pressure) fail("points 2 and 3 do not share the high pressure");
  if (!(p1.pressure < p2.pressure)) fail("low pressure not below high pressure");
  try {
    CycleSpecification spec;
    spec.p_low = p1.pressure;
    spec.p_high = p2.pressure;
    spec.superheat = p1.temperature - model.saturation_temperature(p1.pressure);
    spec.subcooling = model.saturation_temperature(p3.pressure) - p3.temperature;
    if (spec.superheat < 0.0 || spec.subcooling < 0.0) fail("negative superheat or subcooling");
    const double h2s = model.isentropic_compression(p1, p2.pressure).enthalpy;
    spec.eta_isentropic = (h2s - p1.enthalpy) / (p2.enthalpy - p1.enthalpy);
    if (!(spec.eta_isentropic > 0.0 && spec.eta_isentropic <= 1.0 + 1e-12)) fail("compression efficiency outside (0, 1]");
    if (spec.eta_isentropic > 1.0) spec.eta_isentropic = 1.0;
    return spec;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MalformedGeometry) throw;
    throw Error(ErrorKind::MalformedGeometry, std::string("cannot read specification: ") + e.what());
  }
}

CycleSpecification extract_spec(const RefrigerantModel& model, const CycleGeometry& geometry) {
  return extract_spec(model, geometry.points);
}

}  // namespace idoe
