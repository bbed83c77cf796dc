#include "idoe/diagram.hpp"

#include <cmath>
#include <string>

#include "idoe/error.hpp"

namespace idoe {

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

Polyline quality_line(const RefrigerantModel& model, const std::string& family, double x, int samples) {
  Polyline line{family, x, {}};
  for (int i = 0; i < samples; ++i) {
    const double t = model.t_min() + (model.t_max() - model.t_min()) * i / (samples - 1);
    const double hf = model.liquid_enthalpy(t);
    const double hg = model.vapor_enthalpy(t);
    line.vertices.push_back({hf + x * (hg - hf), model.saturation_pressure(t)});
  }
  return line;
}

Polyline isotherm(const RefrigerantModel& model, double t, int samples) {
  Polyline line{"isotherm", t, {}};
  double p_top = model.p_max();
  if (t <= model.t_max()) {
    const double p_sat = model.saturation_pressure(t);
    const double hf = model.liquid_enthalpy(t);
    // Liquid enthalpy is pressure-independent, so the liquid branch is vertical.
    line.vertices.push_back({hf, model.p_max()});
    line.vertices.push_back({hf, p_sat});
    line.vertices.push_back({model.vapor_enthalpy(t), p_sat});
    p_top = p_sat;
  }
  if (p_top > model.p_min()) {
    auto pressures = log_spaced(model.p_min(), p_top, samples);
    for (auto it = pressures.rbegin(); it != pressures.rend(); ++it) {
      const double t_sat = model.saturation_temperature(*it);
      const double h = model.vapor_enthalpy(t_sat) + model.vapor_cp(*it) * (t - t_sat);
      if (line.vertices.empty() || it != pressures.rbegin()) line.vertices.push_back({h, *it});
    }
  }
  return line;
}

Polyline isentrope(const RefrigerantModel& model, double s, int samples) {
  Polyline line{"isentrope", s, {}};
  for (double p : log_spaced(model.p_min(), model.p_max(), samples)) {
    try {
      line.vertices.push_back({model.state_from_ps(p, s).enthalpy, p});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OutOfRange) throw;
    }
  }
  return line;
}

}  // namespace

DiagramOptions DiagramOptions::defaults(const RefrigerantModel& model) {
  DiagramOptions o;
  for (double t = std::ceil(model.t_min() - 273.15) + 273.15; t <= model.t_superheat_max() + 1e-9; t += 10.0)
    o.isotherms.push_back(t);
  const double s_lo = std::ceil(model.vapor_entropy(model.t_max()) / 50.0) * 50.0;
  const double s_hi = model.state_from_ph(model.p_min(),
                                          model.vapor_enthalpy(model.t_min()) +
                                              model.vapor_cp(model.p_min()) * (model.t_superheat_max() - model.t_min()))
                          .entropy;
  for (double s = s_lo; s <= s_hi; s += 50.0) o.isentropes.push_back(s);
  o.qualities = {0.2, 0.4, 0.6, 0.8};
  return o;
}

DiagramPayload diagram_geometry(const RefrigerantModel& model, const DiagramOptions& options) {
  if (options.samples <= 2) throw Error(ErrorKind::InvalidArgument, "diagram sampling resolution must exceed 2");
  DiagramPayload out;
  out.p_min = model.p_min();
  out.p_max = model.p_max();

  if (options.dome) {
    out.lines.push_back(quality_line(model, "dome", 0.0, options.samples));
    out.lines.push_back(quality_line(model, "dome", 1.0, options.samples));
  }
  for (double x : options.qualities) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error(ErrorKind::OutOfRange, "quality level " + std::to_string(x) + " outside [0, 1]");
    }
    out.lines.push_back(quality_line(model, "quality", x, options.samples));
  }
  for (double t : options.isotherms) {
    if (!(t >= model.t_min() && t <= model.t_superheat_max())) {
      throw Error(ErrorKind::OutOfRange, "isotherm level " + std::to_string(t) + " K outside model range");
    }
    out.lines.push_back(isotherm(model, t, options.samples));
  }
  const double s_floor = model.liquid_entropy(model.t_min());
  for (double s : options.isentropes) {
    Polyline line = s >= s_floor ? isentrope(model, s, options.samples) : Polyline{};
    if (line.vertices.size() < 2) {
      throw Error(ErrorKind::OutOfRange, "isentrope level " + std::to_string(s) + " J/(kg K) outside model range");
    }
    out.lines.push_back(std::move(line));
  }
  return out;
}

}  // namespace idoe
