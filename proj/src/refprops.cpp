#include "idoe/refprops.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "idoe/error.hpp"
#include "idoe/root_finding.hpp"

namespace idoe {

namespace {

constexpr double kUniversalGasConstant = 8.314462618;  // J/(mol K)

// Fitted to CoolProp 8.0.0 (IIR reference state) by tools/fit_r134a.py.
CorrelationSet r134a_coefficients() {
  CorrelationSet c;
  c.name = "R134a";
  c.molar_mass = 0.102032;
  c.t_min = 233.15;
  c.t_max = 348.15;
  c.t_superheat_max = 453.15;
  c.t_crit = 374.2119665849513;
  c.p_crit = 4059276.3737910665;
  c.t_ref = 273.15;
  c.h_ref = 200000.0;
  c.s_ref = 1000.0;
  c.saturation_pressure_wagner = {-7.632900453745811, 1.7439617859454333, -2.575813422122951,
                                  -3.421540985153851};
  c.liquid_enthalpy_poly = {200000.0,          134402.51332916354, 13833.28216396907,
                            4559.092958842697, 2093.534265860698,  8125.580279445349};
  c.vapor_enthalpy_poly = {398610.2799861201,   58264.6523907133,   -11589.044315564175,
                           -7072.188917397591,  -936.8687357910196, -14467.189543681156};
  c.liquid_cp_linear = {473.2939812019056, 3.187446193180571};
  c.vapor_cp_linear = {-463.50538186623703, 5.03051425122636};
  c.liquid_density_poly = {1294.735927798958, -324.182121749987, -73.04546874902496,
                           -102.98021895329617};
  c.vapor_compressibility = {2.729637546188143, -5.959362850979238, 4.31115556915124,
                             -1.4932673042536357};
  return c;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double wagner_g(const std::vector<double>& a, double tau) {
  return a[0] * tau + a[1] * std::pow(tau, 1.5) + a[2] * std::pow(tau, 2.5) + a[3] * std::pow(tau, 5.0);
}

double wagner_dg(const std::vector<double>& a, double tau) {
  return a[0] + 1.5 * a[1] * std::sqrt(tau) + 2.5 * a[2] * std::pow(tau, 1.5) +
         5.0 * a[3] * std::pow(tau, 4.0);
}

}  // namespace

RefrigerantModel::RefrigerantModel(CorrelationSet coefficients) : c_(std::move(coefficients)) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::InvalidArgument, "refrigerant model '" + c_.name + "': " + what);
  };
  if (!(c_.t_min < c_.t_max && c_.t_max < c_.t_crit)) fail("requires t_min < t_max < t_crit");
  if (!(c_.t_superheat_max >= c_.t_max)) fail("t_superheat_max below t_max");
  if (!(c_.p_crit > 0.0 && c_.molar_mass > 0.0)) fail("non-positive critical pressure or molar mass");
  if (c_.saturation_pressure_wagner.size() != 4) fail("saturation_pressure_wagner needs 4 terms");
  if (c_.liquid_enthalpy_poly.empty() || c_.vapor_enthalpy_poly.empty() ||
      c_.liquid_density_poly.empty())
    fail("empty polynomial");
  if (c_.liquid_cp_linear.size() != 2 || c_.vapor_cp_linear.size() != 2)
    fail("heat capacity correlations need 2 terms");
  if (c_.vapor_compressibility.size() != 4) fail("vapor_compressibility needs 4 terms");

  p_min_ = saturation_pressure(c_.t_min);
  p_max_ = saturation_pressure(c_.t_max);

  constexpr int kGrid = 1000;
  double prev_p = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = c_.t_min + (c_.t_max - c_.t_min) * i / kGrid;
    const double p = saturation_pressure(t);
    if (!(p > prev_p)) fail("saturation pressure not strictly increasing near T=" + fmt(t));
    prev_p = p;
    if (!(vapor_enthalpy(t) > liquid_enthalpy(t))) fail("non-positive latent heat near T=" + fmt(t));
    if (!(vapor_cp(p) > 0.0)) fail("non-positive vapor cp near T=" + fmt(t));
    if (!(liquid_density(t) > 0.0)) fail("non-positive liquid density near T=" + fmt(t));
  }
}

const RefrigerantModel& RefrigerantModel::r134a() {
  static const RefrigerantModel model(r134a_coefficients());
  return model;
}

RefrigerantModel RefrigerantModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "refprops-correlation") {
      throw Error(ErrorKind::InvalidArgument, "not a refprops-correlation document");
    }
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorKind::InvalidArgument, "unsupported correlation document version");
    }
    CorrelationSet c;
    c.name = doc.at("name").get<std::string>();
    c.molar_mass = doc.at("molar_mass").get<double>();
    c.t_min = doc.at("t_min").get<double>();
    c.t_max = doc.at("t_max").get<double>();
    c.t_superheat_max = doc.at("t_superheat_max").get<double>();
    c.t_crit = doc.at("t_crit").get<double>();
    c.p_crit = doc.at("p_crit").get<double>();
    const auto& ref = doc.at("reference");
    c.t_ref = ref.at("temperature").get<double>();
    c.h_ref = ref.at("enthalpy").get<double>();
    c.s_ref = ref.at("entropy").get<double>();
    c.saturation_pressure_wagner = doc.at("saturation_pressure_wagner").get<std::vector<double>>();
    c.liquid_enthalpy_poly = doc.at("liquid_enthalpy_poly").get<std::vector<double>>();
    c.vapor_enthalpy_poly = doc.at("vapor_enthalpy_poly").get<std::vector<double>>();
    c.liquid_cp_linear = doc.at("liquid_cp_linear").get<std::vector<double>>();
    c.vapor_cp_linear = doc.at("vapor_cp_linear").get<std::vector<double>>();
    c.liquid_density_poly = doc.at("liquid_density_poly").get<std::vector<double>>();
    c.vapor_compressibility = doc.at("vapor_compressibility").get<std::vector<double>>();
    return RefrigerantModel(std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed correlation document: ") + e.what());
  }
}

nlohmann::json RefrigerantModel::to_json() const {
  return {
      {"format", "refprops-correlation"},
      {"version", 1},
      {"name", c_.name},
      {"molar_mass", c_.molar_mass},
      {"t_min", c_.t_min},
      {"t_max", c_.t_max},
      {"t_superheat_max", c_.t_superheat_max},
      {"t_crit", c_.t_crit},
      {"p_crit", c_.p_crit},
      {"reference", {{"temperature", c_.t_ref}, {"enthalpy", c_.h_ref}, {"entropy", c_.s_ref}}},
      {"saturation_pressure_wagner", c_.saturation_pressure_wagner},
      {"liquid_enthalpy_poly", c_.liquid_enthalpy_poly},
      {"vapor_enthalpy_poly", c_.vapor_enthalpy_poly},
      {"liquid_cp_linear", c_.liquid_cp_linear},
      {"vapor_cp_linear", c_.vapor_cp_linear},
      {"liquid_density_poly", c_.liquid_density_poly},
      {"vapor_compressibility", c_.vapor_compressibility},
  };
}

double RefrigerantModel::gas_constant() const { return kUniversalGasConstant / c_.molar_mass; }

void RefrigerantModel::check_temperature(double temperature) const {
  if (!(temperature >= c_.t_min && temperature <= c_.t_max)) {
    throw Error(ErrorKind::OutOfRange, "temperature " + fmt(temperature) + " K outside saturation range [" +
                                           fmt(c_.t_min) + ", " + fmt(c_.t_max) + "] K");
  }
}

void RefrigerantModel::check_pressure(double pressure) const {
  if (!(pressure >= p_min_ && pressure <= p_max_)) {
    throw Error(ErrorKind::OutOfRange, "pressure " + fmt(pressure) + " Pa outside saturation range [" +
                                           fmt(p_min_) + ", " + fmt(p_max_) + "] Pa");
  }
}

namespace {

double poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double poly_derivative(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    acc = acc * x + static_cast<double>(k) * c[k];
  }
  return acc;
}

}  // namespace

double RefrigerantModel::saturation_pressure(double temperature) const {
  check_temperature(temperature);
  const double tau = 1.0 - temperature / c_.t_crit;
  return c_.p_crit * std::exp(c_.t_crit / temperature * wagner_g(c_.saturation_pressure_wagner, tau));
}

double RefrigerantModel::saturation_temperature(double pressure) const {
  check_pressure(pressure);
  if (pressure == p_min_) return c_.t_min;
  if (pressure == p_max_) return c_.t_max;
  const double log_p = std::log(pressure);
  const auto& a = c_.saturation_pressure_wagner;
  auto fdf = [&](double t) {
    const double tau = 1.0 - t / c_.t_crit;
    const double g = wagner_g(a, tau);
    const double f = std::log(c_.p_crit) + c_.t_crit / t * g - log_p;
    const double df = -c_.t_crit / (t * t) * g - wagner_dg(a, tau) / t;
    return std::pair{f, df};
  };
  const auto root = bracketed_newton(fdf, c_.t_min, c_.t_max);
  if (!root) throw Error(ErrorKind::NoSolution, "saturation temperature not bracketed");
  return *root;
}

double RefrigerantModel::liquid_enthalpy(double temperature) const {
  return poly(c_.liquid_enthalpy_poly, (temperature - c_.t_ref) / 100.0);
}

double RefrigerantModel::vapor_enthalpy(double temperature) const {
  return poly(c_.vapor_enthalpy_poly, (temperature - c_.t_ref) / 100.0);
}

double RefrigerantModel::liquid_entropy(double temperature) const {
  const auto& cp = c_.liquid_cp_linear;
  return c_.s_ref + cp[0] * std::log(temperature / c_.t_ref) + cp[1] * (temperature - c_.t_ref);
}

double RefrigerantModel::vapor_entropy(double temperature) const {
  return liquid_entropy(temperature) +
         (vapor_enthalpy(temperature) - liquid_enthalpy(temperature)) / temperature;
}

double RefrigerantModel::liquid_density(double temperature) const {
  return poly(c_.liquid_density_poly, (temperature - c_.t_ref) / 100.0);
}

double RefrigerantModel::vapor_density(double pressure, double temperature) const {
  const auto& b = c_.vapor_compressibility;
  const double pr = pressure / c_.p_crit;
  const double inv_tr = c_.t_crit / temperature;
  const double z = 1.0 + pr * (b[0] + inv_tr * (b[1] + inv_tr * (b[2] + inv_tr * b[3])));
  return pressure / (z * gas_constant() * temperature);
}

double RefrigerantModel::vapor_cp(double pressure) const {
  const double t_sat = saturation_temperature(pressure);
  return c_.vapor_cp_linear[0] + c_.vapor_cp_linear[1] * t_sat;
}

ThermoState RefrigerantModel::sat_liquid_state(double temperature) const {
  check_temperature(temperature);
  ThermoState s;
  s.pressure = saturation_pressure(temperature);
  s.temperature = temperature;
  s.enthalpy = liquid_enthalpy(temperature);
  s.entropy = liquid_entropy(temperature);
  s.quality = 0.0;
  s.density = liquid_density(temperature);
  s.phase = Phase::saturated;
  return s;
}

ThermoState RefrigerantModel::sat_vapor_state(double temperature) const {
  check_temperature(temperature);
  ThermoState s;
  s.pressure = saturation_pressure(temperature);
  s.temperature = temperature;
  s.enthalpy = vapor_enthalpy(temperature);
  s.entropy = vapor_entropy(temperature);
  s.quality = 1.0;
  s.density = vapor_density(s.pressure, temperature);
  s.phase = Phase::saturated;
  return s;
}

ThermoState RefrigerantModel::superheated_state(double pressure, double temperature) const {
  const double t_sat = saturation_temperature(pressure);
  if (temperature < t_sat) {
    throw Error(ErrorKind::NotSuperheated, "T=" + fmt(temperature) + " K is below saturation temperature " +
                                               fmt(t_sat) + " K");
  }
  if (!(temperature <= c_.t_superheat_max)) {
    throw Error(ErrorKind::OutOfRange, "superheated temperature " + fmt(temperature) + " K above model limit");
  }
  ThermoState s = sat_vapor_state(t_sat);
  s.pressure = pressure;
  if (temperature == t_sat) return s;
  const double cp = c_.vapor_cp_linear[0] + c_.vapor_cp_linear[1] * t_sat;
  s.temperature = temperature;
  s.enthalpy += cp * (temperature - t_sat);
  s.entropy += cp * std::log(temperature / t_sat);
  s.density = vapor_density(pressure, temperature);
  s.quality.reset();
  s.phase = Phase::superheated;
  return s;
}

ThermoState RefrigerantModel::subcooled_state(double pressure, double temperature) const {
  const double t_sat = saturation_temperature(pressure);
  if (temperature > t_sat) {
    throw Error(ErrorKind::NotSubcooled, "T=" + fmt(temperature) + " K is above saturation temperature " +
                                             fmt(t_sat) + " K");
  }
  check_temperature(temperature);
  ThermoState s = sat_liquid_state(temperature);
  s.pressure = pressure;
  if (temperature == t_sat) return s;
  s.quality.reset();
  s.phase = Phase::subcooled;
  return s;
}

double RefrigerantModel::inverse_liquid_enthalpy(double enthalpy, double t_upper) const {
  auto fdf = [&](double t) {
    const double x = (t - c_.t_ref) / 100.0;
    return std::pair{poly(c_.liquid_enthalpy_poly, x) - enthalpy,
                     poly_derivative(c_.liquid_enthalpy_poly, x) / 100.0};
  };
  const auto root = bracketed_newton(fdf, c_.t_min, t_upper);
  if (!root) throw Error(ErrorKind::OutOfRange, "liquid enthalpy " + fmt(enthalpy) + " J/kg outside model range");
  return *root;
}

double RefrigerantModel::inverse_liquid_entropy(double entropy) const {
  const auto& cp = c_.liquid_cp_linear;
  auto fdf = [&](double t) {
    return std::pair{liquid_entropy(t) - entropy, (cp[0] + cp[1] * t) / t};
  };
  const auto root = bracketed_newton(fdf, c_.t_min, c_.t_max);
  if (!root) throw Error(ErrorKind::OutOfRange, "liquid entropy " + fmt(entropy) + " J/(kg K) outside model range");
  return *root;
}

namespace {

double mixture_density(double quality, double rho_liquid, double rho_vapor) {
  return 1.0 / (quality / rho_vapor + (1.0 - quality) / rho_liquid);
}

}  // namespace

IsobarProperties RefrigerantModel::isobar(double pressure) const {
  IsobarProperties iso;
  iso.pressure = pressure;
  iso.t_sat = saturation_temperature(pressure);
  iso.h_liq = liquid_enthalpy(iso.t_sat);
  iso.h_vap = vapor_enthalpy(iso.t_sat);
  iso.s_liq = liquid_entropy(iso.t_sat);
  iso.s_vap = vapor_entropy(iso.t_sat);
  iso.cp_vap = c_.vapor_cp_linear[0] + c_.vapor_cp_linear[1] * iso.t_sat;
  iso.rho_liq = liquid_density(iso.t_sat);
  iso.rho_vap = vapor_density(pressure, iso.t_sat);
  return iso;
}

ThermoState RefrigerantModel::state_from_ph(double pressure, double enthalpy) const {
  return state_from_ph(isobar(pressure), enthalpy);
}

ThermoState RefrigerantModel::state_from_ph(const IsobarProperties& iso, double enthalpy) const {
  ThermoState s;
  s.pressure = iso.pressure;
  s.enthalpy = enthalpy;

  if (enthalpy >= iso.h_liq && enthalpy <= iso.h_vap) {
    const double x = (enthalpy - iso.h_liq) / (iso.h_vap - iso.h_liq);
    s.temperature = iso.t_sat;
    s.entropy = iso.s_liq + x * (iso.s_vap - iso.s_liq);
    s.quality = x;
    s.density = mixture_density(x, iso.rho_liq, iso.rho_vap);
    s.phase = Phase::saturated;
    return s;
  }

  if (enthalpy > iso.h_vap) {
    const double t = iso.t_sat + (enthalpy - iso.h_vap) / iso.cp_vap;
    if (!(t <= c_.t_superheat_max)) {
      throw Error(ErrorKind::OutOfRange, "enthalpy " + fmt(enthalpy) + " J/kg beyond superheated range");
    }
    s.temperature = t;
    s.entropy = iso.s_vap + iso.cp_vap * std::log(t / iso.t_sat);
    s.density = vapor_density(iso.pressure, t);
    s.phase = Phase::superheated;
    return s;
  }

  if (!(enthalpy >= liquid_enthalpy(c_.t_min))) {
    throw Error(ErrorKind::OutOfRange, "enthalpy " + fmt(enthalpy) + " J/kg below subcooled range");
  }
  const double t = inverse_liquid_enthalpy(enthalpy, iso.t_sat);
  s.temperature = t;
  s.entropy = liquid_entropy(t);
  s.density = liquid_density(t);
  s.phase = Phase::subcooled;
  return s;
}

ThermoState RefrigerantModel::state_from_ps(double pressure, double entropy) const {
  const double t_sat = saturation_temperature(pressure);
  const double s_liq = liquid_entropy(t_sat);
  const double s_vap = vapor_entropy(t_sat);

  if (entropy >= s_liq && entropy <= s_vap) {
    const double x = (entropy - s_liq) / (s_vap - s_liq);
    const double h_liq = liquid_enthalpy(t_sat);
    const double h_vap = vapor_enthalpy(t_sat);
    ThermoState s;
    s.pressure = pressure;
    s.enthalpy = h_liq + x * (h_vap - h_liq);
    s.temperature = t_sat;
    s.entropy = entropy;
    s.quality = x;
    s.density = mixture_density(x, liquid_density(t_sat), vapor_density(pressure, t_sat));
    s.phase = Phase::saturated;
    return s;
  }

  if (entropy > s_vap) {
    const double cp = c_.vapor_cp_linear[0] + c_.vapor_cp_linear[1] * t_sat;
    const double t = t_sat * std::exp((entropy - s_vap) / cp);
    if (!(t <= c_.t_superheat_max)) {
      throw Error(ErrorKind::OutOfRange, "entropy " + fmt(entropy) + " J/(kg K) beyond superheated range");
    }
    ThermoState s;
    s.pressure = pressure;
    s.enthalpy = vapor_enthalpy(t_sat) + cp * (t - t_sat);
    s.temperature = t;
    s.entropy = entropy;
    s.density = vapor_density(pressure, t);
    s.phase = Phase::superheated;
    return s;
  }

  if (!(entropy >= liquid_entropy(c_.t_min))) {
    throw Error(ErrorKind::OutOfRange, "entropy " + fmt(entropy) + " J/(kg K) below subcooled range");
  }
  const double t = inverse_liquid_entropy(entropy);
  ThermoState s;
  s.pressure = pressure;
  s.enthalpy = liquid_enthalpy(t);
  s.temperature = t;
  s.entropy = entropy;
  s.density = liquid_density(t);
  s.phase = Phase::subcooled;
  return s;
}

ThermoState RefrigerantModel::isentropic_compression(const ThermoState& inlet, double p_out) const {
  const bool vapor = inlet.phase == Phase::superheated ||
                     (inlet.phase == Phase::saturated && inlet.quality && *inlet.quality == 1.0);
  if (!vapor) {
    throw Error(ErrorKind::InvalidArgument, "isentropic compression requires a vapor inlet state");
  }
  if (p_out == inlet.pressure) return inlet;
  if (p_out < inlet.pressure) {
    throw Error(ErrorKind::InvalidArgument, "outlet pressure below inlet pressure");
  }
  const double t_sat = saturation_temperature(p_out);
  const double s_vap = vapor_entropy(t_sat);
  if (inlet.entropy < s_vap) {
    throw Error(ErrorKind::NoSolution, "entropy level reaches the two-phase region at " + fmt(p_out) + " Pa");
  }
  if (inlet.entropy == s_vap) return superheated_state(p_out, t_sat);

  const double cp = c_.vapor_cp_linear[0] + c_.vapor_cp_linear[1] * t_sat;
  auto fdf = [&](double t) { return std::pair{s_vap + cp * std::log(t / t_sat) - inlet.entropy, cp / t}; };
  const auto root = bracketed_newton(fdf, t_sat, c_.t_superheat_max);
  if (!root) {
    throw Error(ErrorKind::NoSolution, "isentropic outlet temperature exceeds " + fmt(c_.t_superheat_max) + " K");
  }
  return superheated_state(p_out, *root);
}

}  // namespace idoe
