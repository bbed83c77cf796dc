#pragma once

// Seeded generators for property tests. Every test draws from its own Rng so
// failures reproduce from the printed seed.

#include <cmath>

#include "idoe/cycle_sim.hpp"
#include "idoe/cycle_spec.hpp"
#include "idoe/doe.hpp"
#include "idoe/rng.hpp"

namespace idoe::testing {

inline ControlParams random_params(Rng& rng, const ParameterBox& box = ParameterBox::defaults()) {
  std::array<double, ControlParams::kCount> v{};
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = rng.uniform(box.dims[d].lower, box.dims[d].upper);
  return ControlParams::from_array(v);
}

/// Pressures log-uniform inside the model window with at least a 1.5 ratio,
/// subcooling and superheat small enough to stay inside the model range.
inline CycleSpecification random_spec(Rng& rng, const RefrigerantModel& model) {
  CycleSpecification s;
  const double lo = std::log(model.saturation_pressure(253.15));
  const double hi = std::log(model.saturation_pressure(333.15));
  do {
    s.p_low = std::exp(rng.uniform(lo, hi));
    s.p_high = std::exp(rng.uniform(lo, hi));
  } while (s.p_high < 1.5 * s.p_low);
  s.subcooling = rng.uniform(0.5, 15.0);
  s.superheat = rng.uniform(0.5, 20.0);
  s.eta_isentropic = rng.uniform(0.5, 0.95);
  return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace idoe::testing
