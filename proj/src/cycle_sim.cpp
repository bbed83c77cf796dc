#include "idoe/cycle_sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "idoe/error.hpp"

namespace idoe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double scaled_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? (a - b) / scale : 0.0;
}

CharPoint nan_point() {
  CharPoint p;
  p.pressure = p.enthalpy = p.temperature = p.entropy = p.density = kNaN;
  return p;
}

struct Suction {
  CharPoint state;
  double m_dot = 0.0;
};

}  // namespace

std::string_view to_string(SimStatus status) {
  switch (status) {
    case SimStatus::ok: return "ok";
    case SimStatus::no_convergence: return "no_convergence";
    case SimStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

void validate(const PlantConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "plant config: " + what); };
  if (!positive_finite(c.t_ambient)) fail("t_ambient must be positive");
  if (!positive_finite(c.ua_cond) || !positive_finite(c.ua_evap) || !positive_finite(c.ua_subcool))
    fail("conductances must be positive");
  if (!(c.ua_evap_vapor_ratio > 0.0 && c.ua_evap_vapor_ratio <= 1.0)) fail("ua_evap_vapor_ratio must lie in (0, 1]");
  if (!positive_finite(c.v_disp)) fail("v_disp must be positive");
  if (!(c.eta_isentropic > 0.0 && c.eta_isentropic <= 1.0)) fail("eta_isentropic must lie in (0, 1]");
  if (!(c.eta_vol_a > 0.0 && c.eta_vol_a <= 1.0) || !(c.eta_vol_b >= 0.0))
    fail("volumetric efficiency coefficients out of range");
  if (!(c.cd_valve > 0.0 && c.cd_valve <= 1.0)) fail("cd_valve must lie in (0, 1]");
  if (!positive_finite(c.cp_air)) fail("cp_air must be positive");
  if (!positive_finite(c.residual_tolerance)) fail("residual_tolerance must be positive");
  if (c.max_outer_iterations < 1 || c.max_inner_iterations < 1) fail("iteration caps must be positive");
  if (!(c.inner_damping > 0.0 && c.inner_damping <= 1.0)) fail("inner_damping must lie in (0, 1]");
}

void validate(const ControlParams& p) {
  for (std::size_t i = 0; i < ControlParams::kCount; ++i) {
    if (!positive_finite(p.to_array()[i])) {
      throw Error(ErrorKind::InvalidArgument,
                  "control parameter " + std::string(ControlParams::kNames[i]) + " must be positive and finite");
    }
  }
}

double effectiveness(double ua, double mf_air, double cp_air) { return 1.0 - std::exp(-ua / (mf_air * cp_air)); }

double volumetric_efficiency(const PlantConfig& config, double pressure_ratio) {
  return config.eta_vol_a - config.eta_vol_b * pressure_ratio;
}

namespace {

double counterflow_effectiveness(double ntu, double c_ratio) {
  if (c_ratio >= 1.0) return ntu / (1.0 + ntu);
  const double e = std::exp(-ntu * (1.0 - c_ratio));
  return (1.0 - e) / (1.0 - c_ratio * e);
}

}  // namespace

double evaporator_duty(const ControlParams& params, const PlantConfig& config, double t_evap, double h_vap,
                       double cp_vap, double h4, double m_dot) {
  const double c_air = params.mf_air_evap * config.cp_air;
  const double dt = params.t_air_cabin - t_evap;
  const double q_max = effectiveness(config.ua_evap, params.mf_air_evap, config.cp_air) * c_air * dt;
  const double q_boil = m_dot * (h_vap - h4);
  if (!(q_boil < q_max)) return q_max;

  // Dry zone: the area left after boiling superheats the vapor in counterflow.
  const double dry = 1.0 - q_boil / q_max;
  const double c_vap = m_dot * cp_vap;
  const double c_min = std::min(c_vap, dry * c_air);
  const double c_max = std::max(c_vap, dry * c_air);
  if (!(c_min > 0.0)) return q_boil;
  const double ntu = config.ua_evap_vapor_ratio * config.ua_evap * dry / c_min;
  return q_boil + counterflow_effectiveness(ntu, c_min / c_max) * c_min * dt;
}

namespace {

// Solves h1 = h4 + Q_evap(m_dot(h1)) / m_dot(h1) at the low-pressure isobar.
// Damped fixed point first; falls back to bisection on the same equation when
// the map is not contractive.
std::optional<Suction> solve_suction(const RefrigerantModel& model, const IsobarProperties& low, double h4,
                                     const ControlParams& params, double mass_per_density,
                                     const PlantConfig& config, double m_guess) {
  const double h_cap = low.h_vap + low.cp_vap * (model.t_superheat_max() - 1e-6 - low.t_sat);
  auto q_of = [&](double m) { return evaporator_duty(params, config, low.t_sat, low.h_vap, low.cp_vap, h4, m); };
  auto at = [&](double h1) {
    Suction s;
    s.state = model.state_from_ph(low, h1);
    s.m_dot = s.state.density * mass_per_density;
    return s;
  };

  double h1 = std::min(h4 + q_of(m_guess) / m_guess, h_cap);
  for (int i = 0; i < config.max_inner_iterations; ++i) {
    const Suction s = at(h1);
    const double target = h4 + q_of(s.m_dot) / s.m_dot;
    if (std::abs(target - h1) <= 1e-13 * std::abs(h1)) return s;
    h1 = std::min((1.0 - config.inner_damping) * h1 + config.inner_damping * target, h_cap);
  }

  auto residual = [&](double h) {
    const double m = at(h).m_dot;
    return h - h4 - q_of(m) / m;
  };
  double lo = h4;
  double hi = h_cap;
  if (residual(hi) < 0.0) return std::nullopt;
  for (int i = 0; i < 200 && hi - lo > 4e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  return at(hi);
}

}  // namespace

ResidualEvaluation evaluate_residuals(const RefrigerantModel& model, const ControlParams& params,
                                      const PlantConfig& config, double t_evap, double t_cond) {
  ResidualEvaluation ev;
  auto fail = [&](std::string why) {
    ev.ok = false;
    ev.failure = std::move(why);
    return ev;
  };
  if (!(t_evap >= model.t_min() && t_cond <= model.t_max())) return fail("saturation temperatures out of range");
  if (!(t_evap < t_cond)) return fail("evaporating temperature not below condensing temperature");
  if (!(t_evap < params.t_air_cabin)) return fail("evaporator not colder than cabin air");
  if (!(t_cond > config.t_ambient)) return fail("condenser not warmer than ambient air");

  try {
    const IsobarProperties low = model.isobar(model.saturation_pressure(t_evap));
    const IsobarProperties high = model.isobar(model.saturation_pressure(t_cond));
    const double eta_vol = volumetric_efficiency(config, high.pressure / low.pressure);
    if (!(eta_vol > 0.0)) return fail("pressure ratio beyond compressor capability");

    const double eps_sub = effectiveness(config.ua_subcool, params.mf_air_cond, config.cp_air);
    const double t3 = t_cond - eps_sub * (t_cond - config.t_ambient);
    auto& [p1, p2, p3, p4] = ev.points;
    p3 = model.state_from_ph(high, model.liquid_enthalpy(t3));
    p4 = model.state_from_ph(low, p3.enthalpy);

    ev.m_valve = config.cd_valve * params.a_eff_valve * std::sqrt(2.0 * p3.density * (high.pressure - low.pressure));
    ev.q_cond_air = effectiveness(config.ua_cond, params.mf_air_cond, config.cp_air) * params.mf_air_cond *
                    config.cp_air * (t_cond - config.t_ambient);

    const double mass_per_density = config.v_disp * params.n_pump / 60.0 * eta_vol;
    const auto suction = solve_suction(model, low, p4.enthalpy, params, mass_per_density, config, ev.m_valve);
    if (!suction) return fail("no suction state balances the evaporator");
    p1 = suction->state;
    ev.m_compressor = suction->m_dot;
    ev.q_evap = ev.m_compressor * (p1.enthalpy - p4.enthalpy);

    const bool vapor = p1.phase == Phase::superheated;
    const double h2s = vapor ? model.isentropic_compression(p1, high.pressure).enthalpy
                             : model.state_from_ps(high.pressure, p1.entropy).enthalpy;
    p2 = model.state_from_ph(high, p1.enthalpy + (h2s - p1.enthalpy) / config.eta_isentropic);

    ev.mass = scaled_difference(ev.m_compressor, ev.m_valve);
    ev.energy = scaled_difference(ev.q_cond_air, ev.m_compressor * (p2.enthalpy - p3.enthalpy));
    ev.ok = std::isfinite(ev.mass) && std::isfinite(ev.energy);
    if (!ev.ok) return fail("non-finite residual");
    return ev;
  } catch (const Error& e) {
    return fail(e.what());
  }
}

namespace {

struct Trial {
  double t_evap;
  double t_cond;
  ResidualEvaluation ev;
  double norm() const { return std::max(std::abs(ev.mass), std::abs(ev.energy)); }
};

class CycleSolver {
 public:
  CycleSolver(const RefrigerantModel& model, const ControlParams& params, const PlantConfig& config)
      : model_(model), params_(params), config_(config) {}

  Trial eval(double te, double tc) { return {te, tc, evaluate_residuals(model_, params_, config_, te, tc)}; }

  bool converged(const Trial& t) const { return t.ev.ok && t.norm() <= config_.residual_tolerance; }

  /// Damped Newton with a forward-difference Jacobian.
  std::optional<Trial> newton(double te, double tc, int& iterations) {
    Trial x = eval(te, tc);
    if (!x.ev.ok) return std::nullopt;
    constexpr double kFd = 1e-5;
    constexpr double kMaxStep = 10.0;
    for (; iterations < config_.max_outer_iterations; ++iterations) {
      if (converged(x)) return x;
      double j[2][2];
      for (int k = 0; k < 2; ++k) {
        double h = kFd;
        Trial d = k == 0 ? eval(x.t_evap + h, x.t_cond) : eval(x.t_evap, x.t_cond + h);
        if (!d.ev.ok) {
          h = -kFd;
          d = k == 0 ? eval(x.t_evap + h, x.t_cond) : eval(x.t_evap, x.t_cond + h);
          if (!d.ev.ok) return std::nullopt;
        }
        j[0][k] = (d.ev.mass - x.ev.mass) / h;
        j[1][k] = (d.ev.energy - x.ev.energy) / h;
      }
      const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
      if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return std::nullopt;
      double dte = -(j[1][1] * x.ev.mass - j[0][1] * x.ev.energy) / det;
      double dtc = -(-j[1][0] * x.ev.mass + j[0][0] * x.ev.energy) / det;
      const double biggest = std::max(std::abs(dte), std::abs(dtc));
      if (biggest > kMaxStep) {
        dte *= kMaxStep / biggest;
        dtc *= kMaxStep / biggest;
      }
      bool accepted = false;
      for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
        Trial y = eval(x.t_evap + lambda * dte, x.t_cond + lambda * dtc);
        if (y.ev.ok && y.norm() < (1.0 - 1e-4 * lambda) * x.norm()) {
          x = std::move(y);
          accepted = true;
          break;
        }
      }
      if (!accepted) return std::nullopt;
    }
    return converged(x) ? std::optional<Trial>(x) : std::nullopt;
  }

  /// Condensing temperature balancing the condenser at fixed t_evap.
  std::optional<Trial> balance_condenser(double te, double rel_tol = 1e-13) {
    double lo = std::max(config_.t_ambient, te);
    double hi = model_.t_max();
    lo += 1e-9 * lo;
    Trial t_hi = eval(te, hi);
    if (!t_hi.ev.ok) {
      // High condensing temperatures can exceed the compressor's pressure
      // ratio; walk down to the feasible edge and bisect onto it.
      constexpr double kStep = 2.0;
      double ok_tc = hi - kStep;
      while (ok_tc > lo && !eval(te, ok_tc).ev.ok) ok_tc -= kStep;
      if (ok_tc <= lo) return std::nullopt;
      double bad_tc = std::min(ok_tc + kStep, hi);
      for (int i = 0; i < 60 && bad_tc - ok_tc > 1e-9 * bad_tc; ++i) {
        const double mid = 0.5 * (ok_tc + bad_tc);
        (eval(te, mid).ev.ok ? ok_tc : bad_tc) = mid;
      }
      hi = ok_tc;
      t_hi = eval(te, hi);
    }
    if (t_hi.ev.energy < 0.0) return std::nullopt;
    Trial best = t_hi;
    for (int i = 0; i < 80 && hi - lo > rel_tol * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      Trial t = eval(te, mid);
      if (!t.ev.ok || t.ev.energy < 0.0) {
        lo = mid;
      } else {
        hi = mid;
        best = std::move(t);
      }
    }
    return best;
  }

  /// Fallback: scan t_evap for a sign change of the mass residual along the
  /// condenser-balanced curve, then bisect.
  std::optional<Trial> bracket(int& iterations) {
    const double te_lo = model_.t_min();
    const double te_hi = std::min(params_.t_air_cabin, model_.t_max()) - 1e-6;
    if (!(te_hi > te_lo)) return std::nullopt;
    constexpr int kScan = 48;
    std::optional<Trial> prev;
    for (int i = 0; i <= kScan; ++i) {
      const double te = te_lo + (te_hi - te_lo) * i / kScan;
      auto cur = balance_condenser(te, 1e-6);
      ++iterations;
      if (!cur) continue;
      if (prev && (prev->ev.mass < 0.0) != (cur->ev.mass < 0.0)) {
        Trial a = *balance_condenser(prev->t_evap);
        Trial b = *balance_condenser(cur->t_evap);
        for (int k = 0; k < 80 && b.t_evap - a.t_evap > 1e-13 * b.t_evap; ++k) {
          auto mid = balance_condenser(0.5 * (a.t_evap + b.t_evap));
          ++iterations;
          if (!mid) return std::nullopt;
          ((mid->ev.mass < 0.0) == (a.ev.mass < 0.0) ? a : b) = *mid;
          if (converged(*mid)) return mid;
        }
        return std::abs(a.ev.mass) < std::abs(b.ev.mass) ? a : b;
      }
      prev = cur;
    }
    return std::nullopt;
  }

 private:
  const RefrigerantModel& model_;
  const ControlParams& params_;
  const PlantConfig& config_;
};

}  // namespace

CycleResult simulate(const ControlParams& params, const PlantConfig& config, const RefrigerantModel& model) {
  validate(params);
  validate(config);
  if (!(params.t_air_cabin >= model.t_min() && params.t_air_cabin <= model.t_max())) {
    throw Error(ErrorKind::InvalidArgument, "cabin air temperature outside property range");
  }

  CycleResult r;
  r.points.fill(nan_point());
  r.m_dot = r.cop = r.w = r.dh_e = r.dh_c = r.t_subcooling = r.t_superheating = kNaN;

  CycleSolver solver(model, params, config);
  const double te0 = std::clamp(params.t_air_cabin - 15.0, model.t_min() + 1.0, params.t_air_cabin - 1.0);
  const double tc0 = std::clamp(config.t_ambient + 15.0, config.t_ambient + 1.0, model.t_max() - 1.0);
  int iterations = 0;
  auto solution = solver.newton(te0, tc0, iterations);
  if (!solution) {
    solution = solver.bracket(iterations);
    if (solution && !solver.converged(*solution)) {
      int polish = 0;
      if (auto refined = solver.newton(solution->t_evap, solution->t_cond, polish)) solution = refined;
    }
  }
  if (!solution || !solver.converged(*solution)) {
    r.status = SimStatus::no_convergence;
    r.reason = "steady-state solver did not converge";
    if (solution) r.reason += " (residual " + std::to_string(solution->norm()) + ")";
    return r;
  }

  const auto& ev = solution->ev;
  r.points = ev.points;
  const auto& [p1, p2, p3, p4] = r.points;
  const double t_sat_low = model.saturation_temperature(p1.pressure);
  const double t_sat_high = model.saturation_temperature(p3.pressure);
  r.m_dot = ev.m_compressor;
  r.dh_c = r.m_dot * (p1.enthalpy - p4.enthalpy);
  r.w = r.m_dot * (p2.enthalpy - p1.enthalpy);
  r.dh_e = r.m_dot * (p2.enthalpy - p3.enthalpy);
  r.cop = r.dh_c / r.w;
  r.t_subcooling = t_sat_high - p3.temperature;
  r.t_superheating = p1.phase == Phase::superheated
                         ? p1.temperature - t_sat_low
                         : (p1.enthalpy - model.vapor_enthalpy(t_sat_low)) / model.vapor_cp(p1.pressure);

  if (r.t_superheating < 0.0) {
    r.status = SimStatus::infeasible;
    r.reason = "negative superheat: wet compressor suction";
  } else if (r.t_subcooling < 0.0) {
    r.status = SimStatus::infeasible;
    r.reason = "negative subcooling at condenser outlet";
  } else if (p1.temperature > params.t_air_cabin * (1.0 + 1e-12)) {
    r.status = SimStatus::infeasible;
    r.reason = "suction vapor warmer than cabin air";
  } else {
    r.status = SimStatus::ok;
    r.valid = true;
  }
  return r;
}

std::vector<CycleResult> simulate_batch(std::span<const ControlParams> params, const PlantConfig& config,
                                        const RefrigerantModel& model, unsigned threads) {
  validate(config);
  std::vector<CycleResult> out(params.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, params.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < params.size(); i = next++) {
      try {
        out[i] = simulate(params[i], config, model);
      } catch (const Error& e) {
        out[i].points.fill(nan_point());
        out[i].valid = false;
        out[i].status = SimStatus::infeasible;
        out[i].reason = e.what();
      }
    }
  };
  if (threads <= 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  return out;
}

const std::vector<std::string>& cycle_csv_columns() {
  static const std::vector<std::string> columns = {
      "n_pump", "mf_air_cond", "t_air_cabin", "mf_air_evap", "a_eff_valve",
      "p1", "h1", "t1", "p2", "h2", "t2", "p3", "h3", "t3", "p4", "h4", "t4",
      "m_dot", "cop", "w", "dh_e", "dh_c", "t_subcooling", "t_superheating", "valid", "reason"};
  return columns;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::string> cycle_csv_fields(const ControlParams& params, const CycleResult& result) {
  std::vector<std::string> f;
  f.reserve(cycle_csv_columns().size());
  for (double v : params.to_array()) f.push_back(shortest(v));
  for (const auto& p : result.points) {
    f.push_back(shortest(p.pressure));
    f.push_back(shortest(p.enthalpy));
    f.push_back(shortest(p.temperature));
  }
  for (double v : {result.m_dot, result.cop, result.w, result.dh_e, result.dh_c, result.t_subcooling,
                   result.t_superheating})
    f.push_back(shortest(v));
  f.push_back(result.valid ? "1" : "0");
  f.push_back(result.reason);
  return f;
}

}  // namespace idoe
