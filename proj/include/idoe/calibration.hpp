#pragma once

#include <array>
#include <cstddef>

#include "idoe/cycle_sim.hpp"
#include "idoe/doe.hpp"

namespace idoe {

/// Operating point a calibrated plant must reproduce.
struct CalibrationTarget {
  double p_low = 2.5e5;      // Pa
  double p_high = 12.0e5;    // Pa
  double subcooling = 7.0;   // K
  double superheat = 8.0;    // K
};

struct CalibrationOptions {
  std::size_t grid_levels = 5;        // per dimension of the coarse grid
  std::size_t starts = 4;             // best grid points refined locally
  double final_step = 1e-6;           // finite-difference step, fraction of box width
  std::size_t max_evaluations = 20000;
  double tolerance = 0.10;            // accepted max relative error
};

struct CalibrationResult {
  ControlParams params;
  CycleResult result;
  std::array<double, 4> relative_errors{};  // p_low, p_high, subcooling, superheat
  double max_relative_error = 0.0;
  std::size_t evaluations = 0;
  bool within_tolerance = false;
};

/// Relative deviation of a simulated run from the target, per quantity.
std::array<double, 4> calibration_errors(const CycleResult& result, const CalibrationTarget& target);

/// Coarse grid over the box followed by damped Gauss-Newton from the best
/// grid points. Parameters stay inside the box.
CalibrationResult calibrate(const PlantConfig& config, const ParameterBox& box, const CalibrationTarget& target,
                            const CalibrationOptions& options = {});

/// Baseline control parameters of the repository plant, found with
/// calibrate() on the default PlantConfig and frozen here.
ControlParams default_baseline_params();

}  // namespace idoe
