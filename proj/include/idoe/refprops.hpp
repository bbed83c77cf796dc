#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace idoe {

enum class Phase { subcooled, saturated, superheated };

/// One thermodynamic state of the refrigerant (SI units throughout).
/// `quality` is set exactly for states on or inside the dome.
struct ThermoState {
  double pressure = 0.0;     // Pa
  double enthalpy = 0.0;     // J/kg
  double temperature = 0.0;  // K
  double entropy = 0.0;      // J/(kg K)
  std::optional<double> quality;
  double density = 0.0;  // kg/m3
  Phase phase = Phase::saturated;
};

/// A characteristic point of the cycle is a plain refrigerant state.
using CharPoint = ThermoState;

/// Saturation properties of one isobar, computed once and reused by
/// repeated (P, h) lookups at that pressure.
struct IsobarProperties {
  double pressure = 0.0;
  double t_sat = 0.0;
  double h_liq = 0.0;
  double h_vap = 0.0;
  double s_liq = 0.0;
  double s_vap = 0.0;
  double cp_vap = 0.0;
  double rho_liq = 0.0;
  double rho_vap = 0.0;
};

/// Coefficients of the correlation set. Polynomials are in
/// x = (T - reference.temperature) / 100.
struct CorrelationSet {
  std::string name;
  double molar_mass = 0.0;       // kg/mol
  double t_min = 0.0;            // K, saturation validity
  double t_max = 0.0;            // K, saturation validity
  double t_superheat_max = 0.0;  // K, upper bound for superheated vapor
  double t_crit = 0.0;
  double p_crit = 0.0;
  double t_ref = 273.15;
  double h_ref = 200000.0;
  double s_ref = 1000.0;
  std::vector<double> saturation_pressure_wagner;  // 4 terms
  std::vector<double> liquid_enthalpy_poly;
  std::vector<double> vapor_enthalpy_poly;
  std::vector<double> liquid_cp_linear;  // c0 + c1 T
  std::vector<double> vapor_cp_linear;   // c0 + c1 Tsat(P)
  std::vector<double> liquid_density_poly;
  std::vector<double> vapor_compressibility;  // Z = 1 + Pr (b0 + b1/Tr + b2/Tr^2 + b3/Tr^3)
};

/// Correlation-based property model for a pure refrigerant over its
/// subcritical range. Immutable after construction; every member is const
/// and safe to call concurrently.
class RefrigerantModel {
 public:
  /// Validates the coefficient set (bounds ordering, monotone saturation
  /// curve, positive latent heat) and throws InvalidArgument otherwise.
  explicit RefrigerantModel(CorrelationSet coefficients);

  /// Compiled-in R134a coefficients.
  static const RefrigerantModel& r134a();

  static RefrigerantModel from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  const CorrelationSet& coefficients() const { return c_; }
  const std::string& name() const { return c_.name; }
  double t_min() const { return c_.t_min; }
  double t_max() const { return c_.t_max; }
  double t_superheat_max() const { return c_.t_superheat_max; }
  double t_crit() const { return c_.t_crit; }
  double p_crit() const { return c_.p_crit; }
  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }
  double gas_constant() const;

  double saturation_pressure(double temperature) const;
  double saturation_temperature(double pressure) const;

  // Saturation-curve correlations; arguments are saturation temperatures.
  double liquid_enthalpy(double temperature) const;
  double vapor_enthalpy(double temperature) const;
  double liquid_entropy(double temperature) const;
  double vapor_entropy(double temperature) const;
  double liquid_density(double temperature) const;
  double vapor_density(double pressure, double temperature) const;

  /// Isobaric vapor heat capacity for the superheated region at `pressure`.
  double vapor_cp(double pressure) const;

  ThermoState sat_liquid_state(double temperature) const;
  ThermoState sat_vapor_state(double temperature) const;
  ThermoState superheated_state(double pressure, double temperature) const;
  ThermoState subcooled_state(double pressure, double temperature) const;
  ThermoState state_from_ph(double pressure, double enthalpy) const;

  IsobarProperties isobar(double pressure) const;
  ThermoState state_from_ph(const IsobarProperties& isobar, double enthalpy) const;

  /// Closed-form inversion of s at fixed pressure, any phase.
  ThermoState state_from_ps(double pressure, double entropy) const;

  /// Constant-entropy compression of a vapor state to `p_out`, found by
  /// root-finding the outlet temperature.
  ThermoState isentropic_compression(const ThermoState& inlet, double p_out) const;

 private:
  void check_temperature(double temperature) const;
  void check_pressure(double pressure) const;
  double inverse_liquid_enthalpy(double enthalpy, double t_upper) const;
  double inverse_liquid_entropy(double entropy) const;

  CorrelationSet c_;
  double p_min_ = 0.0;
  double p_max_ = 0.0;
};

}  // namespace idoe
