#include "idoe/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "idoe/error.hpp"

namespace idoe {

std::array<double, 4> calibration_errors(const CycleResult& r, const CalibrationTarget& t) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (!r.valid) return {kInf, kInf, kInf, kInf};
  return {std::abs(r.points[0].pressure / t.p_low - 1.0), std::abs(r.points[1].pressure / t.p_high - 1.0),
          std::abs(r.t_subcooling / t.subcooling - 1.0), std::abs(r.t_superheating / t.superheat - 1.0)};
}

namespace {

constexpr std::size_t D = ControlParams::kCount;
using Vec = std::array<double, D>;
using Res = std::array<double, 4>;

std::optional<Res> signed_errors(const CycleResult& r, const CalibrationTarget& t) {
  if (!r.valid) return std::nullopt;
  return Res{r.points[0].pressure / t.p_low - 1.0, r.points[1].pressure / t.p_high - 1.0,
             r.t_subcooling / t.subcooling - 1.0, r.t_superheating / t.superheat - 1.0};
}

double sum_sq(const Res& r) {
  double s = 0.0;
  for (double e : r) s += e * e;
  return s;
}

// Solves the 4x4 system a x = b by Gaussian elimination with partial pivoting.
std::optional<Res> solve4(std::array<std::array<double, 4>, 4> a, Res b) {
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (!(std::abs(a[piv][c]) > 0.0)) return std::nullopt;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Res x{};
  for (std::size_t i = 4; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < 4; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

struct Candidate {
  Vec u;  // unit-box coordinates
  double score;
};

}  // namespace

CalibrationResult calibrate(const PlantConfig& config, const ParameterBox& box, const CalibrationTarget& target,
                            const CalibrationOptions& options) {
  box.validate();
  validate(config);
  if (options.grid_levels < 1 || options.starts < 1 || !(options.final_step > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "calibration options out of range");
  }
  const std::size_t g = options.grid_levels;
  std::size_t evaluations = 0;

  auto to_params = [&](const Vec& u) {
    Vec x{};
    for (std::size_t d = 0; d < D; ++d) {
      x[d] = box.dims[d].lower + std::clamp(u[d], 0.0, 1.0) * (box.dims[d].upper - box.dims[d].lower);
    }
    return ControlParams::from_array(x);
  };
  auto residual = [&](const Vec& u) {
    ++evaluations;
    return signed_errors(simulate(to_params(u), config), target);
  };

  std::size_t total = 1;
  for (std::size_t d = 0; d < D; ++d) total *= g;
  std::vector<Vec> grid_u;
  std::vector<ControlParams> grid;
  grid_u.reserve(total);
  grid.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    Vec u{};
    std::size_t rest = k;
    for (std::size_t d = 0; d < D; ++d) {
      u[d] = (static_cast<double>(rest % g) + 0.5) / static_cast<double>(g);
      rest /= g;
    }
    grid_u.push_back(u);
    grid.push_back(to_params(u));
  }
  const auto results = simulate_batch(grid, config);
  evaluations += grid.size();

  std::vector<Candidate> ranked;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (auto r = signed_errors(results[i], target)) ranked.push_back({grid_u[i], sum_sq(*r)});
  }
  if (ranked.empty()) throw Error(ErrorKind::NoSolution, "no valid run on the calibration grid");
  std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) { return a.score < b.score; });

  // Damped minimum-norm Gauss-Newton: five unknowns, four targets.
  Candidate best = ranked.front();
  const std::size_t starts = std::min(options.starts, ranked.size());
  for (std::size_t s = 0; s < starts && evaluations < options.max_evaluations; ++s) {
    Vec u = ranked[s].u;
    auto r = residual(u);
    if (!r) continue;
    double lambda = 1e-3;
    for (int it = 0; it < 100 && evaluations < options.max_evaluations; ++it) {
      if (std::sqrt(sum_sq(*r)) < 1e-10) break;
      std::array<Res, D> jac{};  // jac[d] = d r / d u_d
      bool ok = true;
      for (std::size_t d = 0; d < D && ok; ++d) {
        double h = options.final_step;
        Vec v = u;
        v[d] += h;
        if (v[d] > 1.0) {
          h = -h;
          v[d] = u[d] + h;
        }
        const auto rd = residual(v);
        if (!rd) {
          ok = false;
          break;
        }
        for (std::size_t i = 0; i < 4; ++i) jac[d][i] = ((*rd)[i] - (*r)[i]) / h;
      }
      if (!ok) break;

      bool accepted = false;
      for (int tries = 0; tries < 12 && !accepted; ++tries) {
        std::array<std::array<double, 4>, 4> jjt{};
        for (std::size_t i = 0; i < 4; ++i)
          for (std::size_t k = 0; k < 4; ++k) {
            for (std::size_t d = 0; d < D; ++d) jjt[i][k] += jac[d][i] * jac[d][k];
            if (i == k) jjt[i][k] += lambda;
          }
        const auto y = solve4(jjt, *r);
        if (!y) {
          lambda *= 10.0;
          continue;
        }
        Vec v = u;
        for (std::size_t d = 0; d < D; ++d) {
          double step = 0.0;
          for (std::size_t i = 0; i < 4; ++i) step += jac[d][i] * (*y)[i];
          v[d] = std::clamp(u[d] - step, 0.0, 1.0);
        }
        const auto rv = residual(v);
        if (rv && sum_sq(*rv) < sum_sq(*r)) {
          u = v;
          r = rv;
          lambda = std::max(lambda * 0.3, 1e-12);
          accepted = true;
        } else {
          lambda *= 10.0;
        }
      }
      if (!accepted) break;
    }
    if (sum_sq(*r) < best.score) best = {u, sum_sq(*r)};
  }

  CalibrationResult out;
  out.params = to_params(best.u);
  out.result = simulate(out.params, config);
  out.relative_errors = calibration_errors(out.result, target);
  out.max_relative_error = *std::max_element(out.relative_errors.begin(), out.relative_errors.end());
  out.evaluations = evaluations;
  out.within_tolerance = out.max_relative_error <= options.tolerance;
  return out;
}

ControlParams default_baseline_params() {
  return {3832.3705511873222, 0.49665811175848262, 298.79962502632583, 0.19930806704118825, 2.8223247463971113e-06};
}

}  // namespace idoe
