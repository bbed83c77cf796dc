#pragma once

#include <string>
#include <vector>

#include "idoe/refprops.hpp"

namespace idoe {

/// Which iso-line families to draw and at which levels (SI units).
struct DiagramOptions {
  bool dome = true;
  std::vector<double> isotherms;   // K
  std::vector<double> isentropes;  // J/(kg K)
  std::vector<double> qualities;   // [0, 1]
  int samples = 64;

  /// Temperatures every 10 K, entropies every 0.05 kJ/(kg K), qualities
  /// 0.2 .. 0.8.
  static DiagramOptions defaults(const RefrigerantModel& model);
};

struct DiagramVertex {
  double enthalpy = 0.0;  // J/kg
  double pressure = 0.0;  // Pa
};

struct Polyline {
  std::string family;  // dome | quality | isotherm | isentrope
  double level = 0.0;  // SI value of the iso quantity
  std::vector<DiagramVertex> vertices;
};

struct DiagramPayload {
  double p_min = 0.0;
  double p_max = 0.0;
  std::vector<Polyline> lines;
};

/// Polylines of the p-h diagram window [p_min, p_max] of the model.
/// Throws OutOfRange for levels outside model validity.
DiagramPayload diagram_geometry(const RefrigerantModel& model, const DiagramOptions& options);

}  // namespace idoe
