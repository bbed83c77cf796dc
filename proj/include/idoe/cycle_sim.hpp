#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idoe/refprops.hpp"

namespace idoe {

/// The five control parameters of the AC system.
struct ControlParams {
  double n_pump = 0.0;       // compressor speed, rev/min
  double mf_air_cond = 0.0;  // condenser air mass flow, kg/s
  double t_air_cabin = 0.0;  // cabin air temperature, K
  double mf_air_evap = 0.0;  // evaporator air mass flow, kg/s
  double a_eff_valve = 0.0;  // effective valve flow area, m2

  static constexpr std::size_t kCount = 5;
  static constexpr std::array<std::string_view, kCount> kNames = {"n_pump", "mf_air_cond", "t_air_cabin",
                                                                   "mf_air_evap", "a_eff_valve"};

  std::array<double, kCount> to_array() const { return {n_pump, mf_air_cond, t_air_cabin, mf_air_evap, a_eff_valve}; }
  static ControlParams from_array(const std::array<double, kCount>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

  friend bool operator==(const ControlParams&, const ControlParams&) = default;
};

/// Fixed plant constants. Defaults are the calibrated repository plant.
struct PlantConfig {
  double t_ambient = 303.15;     // K
  double ua_cond = 1500.0;       // W/K
  double ua_evap = 1000.0;       // W/K
  double ua_evap_vapor_ratio = 0.3;  // dry-zone conductance relative to boiling
  double ua_subcool = 280.0;     // W/K, liquid section of the condenser
  double v_disp = 1.0e-4;        // m3/rev
  double eta_isentropic = 0.7;
  double eta_vol_a = 1.0;        // eta_vol = a - b * (P_high / P_low)
  double eta_vol_b = 0.1;
  double cd_valve = 0.3;
  double cp_air = 1006.0;        // J/(kg K)

  double residual_tolerance = 1e-8;
  int max_outer_iterations = 100;
  int max_inner_iterations = 200;
  double inner_damping = 0.5;

  friend bool operator==(const PlantConfig&, const PlantConfig&) = default;
};

/// Validates ranges; throws InvalidArgument.
void validate(const PlantConfig& config);
void validate(const ControlParams& params);

enum class SimStatus { ok, no_convergence, infeasible };

std::string_view to_string(SimStatus status);

struct CycleResult {
  std::array<CharPoint, 4> points;
  double m_dot = 0.0;           // kg/s
  double cop = 0.0;
  double w = 0.0;               // compressor power, W
  double dh_e = 0.0;            // condenser capacity, W
  double dh_c = 0.0;            // refrigerant (evaporator) capacity, W
  double t_subcooling = 0.0;    // K
  double t_superheating = 0.0;  // K
  bool valid = false;
  SimStatus status = SimStatus::no_convergence;
  std::string reason;
};

/// The two steady-state residuals at a trial operating point.
struct ResidualEvaluation {
  bool ok = false;
  std::string failure;
  double mass = 0.0;    // (m_comp - m_valve) / max(m_comp, m_valve)
  double energy = 0.0;  // (Q_air - Q_ref) / max(|Q_air|, |Q_ref|) on the condenser
  double m_compressor = 0.0;
  double m_valve = 0.0;
  double q_evap = 0.0;
  double q_cond_air = 0.0;
  std::array<CharPoint, 4> points;
};

/// Heat-exchanger effectiveness 1 - exp(-UA / (m_air cp_air)).
double effectiveness(double ua, double mf_air, double cp_air);

/// Evaporator heat duty at refrigerant flow m_dot. While the outlet is wet the
/// whole coil boils and the duty is eps * C_air * (T_cabin - T_evap); once the
/// flow evaporates early, the remaining dry area superheats the vapor in
/// counterflow, so the outlet never exceeds the cabin air temperature.
double evaporator_duty(const ControlParams& params, const PlantConfig& config, double t_evap, double h_vap,
                       double cp_vap, double h4, double m_dot);
double volumetric_efficiency(const PlantConfig& config, double pressure_ratio);

ResidualEvaluation evaluate_residuals(const RefrigerantModel& model, const ControlParams& params,
                                      const PlantConfig& config, double t_evap, double t_cond);

/// Quasi-steady solve of the cycle. Never throws for physically inadmissible
/// operating points; those come back with valid == false and a reason.
CycleResult simulate(const ControlParams& params, const PlantConfig& config,
                     const RefrigerantModel& model = RefrigerantModel::r134a());

/// Order-preserving parallel batch; results are bit-identical to sequential
/// calls regardless of scheduling.
std::vector<CycleResult> simulate_batch(std::span<const ControlParams> params, const PlantConfig& config,
                                        const RefrigerantModel& model = RefrigerantModel::r134a(),
                                        unsigned threads = 0);

/// Fixed CSV layout of one run: five params, P/h/T per point 1-4, m_dot,
/// cop, w, dh_e, dh_c, t_subcooling, t_superheating, valid, reason.
const std::vector<std::string>& cycle_csv_columns();
std::vector<std::string> cycle_csv_fields(const ControlParams& params, const CycleResult& result);

}  // namespace idoe
