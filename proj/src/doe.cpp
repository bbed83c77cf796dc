#include "idoe/doe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "idoe/error.hpp"
#include "idoe/rng.hpp"

namespace idoe {

ParameterBox ParameterBox::defaults() {
  ParameterBox b;
  b.dims = {Dimension{"n_pump", 800.0, 8000.0}, Dimension{"mf_air_cond", 0.1, 1.0},
            Dimension{"t_air_cabin", 293.15, 323.15}, Dimension{"mf_air_evap", 0.05, 0.5},
            Dimension{"a_eff_valve", 0.5e-6, 5.0e-6}};
  return b;
}

void ParameterBox::validate() const {
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const auto& dim = dims[d];
    if (dim.name != ControlParams::kNames[d]) {
      throw Error(ErrorKind::InvalidBox, "dimension " + std::to_string(d) + " must be named " +
                                             std::string(ControlParams::kNames[d]));
    }
    if (!std::isfinite(dim.lower) || !std::isfinite(dim.upper) || !(dim.lower < dim.upper)) {
      throw Error(ErrorKind::InvalidBox, "dimension " + dim.name + " needs finite lower < upper");
    }
    if (!(dim.lower > 0.0)) throw Error(ErrorKind::InvalidBox, "dimension " + dim.name + " must be positive");
  }
}

bool ParameterBox::contains(const ControlParams& p) const {
  const auto x = p.to_array();
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (!(x[d] >= dims[d].lower && x[d] <= dims[d].upper)) return false;
  }
  return true;
}

ControlParams ParameterBox::clip(const ControlParams& p) const {
  auto x = p.to_array();
  for (std::size_t d = 0; d < dims.size(); ++d) x[d] = std::clamp(x[d], dims[d].lower, dims[d].upper);
  return ControlParams::from_array(x);
}

std::size_t stratum_of(double x, double lo, double hi, std::size_t n) {
  const double u = (x - lo) / (hi - lo) * static_cast<double>(n);
  if (!(u > 0.0)) return 0;
  return std::min(n - 1, static_cast<std::size_t>(u));
}

namespace {

// Uniform draw inside stratum k of [lo, hi]; the nudge loop guards against
// rounding pushing the value into a neighbour.
double draw_in_stratum(Rng& rng, double lo, double hi, std::size_t k, std::size_t n) {
  const double u = (static_cast<double>(k) + rng.uniform()) / static_cast<double>(n);
  double x = std::clamp(lo + u * (hi - lo), lo, hi);
  while (stratum_of(x, lo, hi, n) < k) x = std::nextafter(x, hi);
  while (stratum_of(x, lo, hi, n) > k) x = std::nextafter(x, lo);
  return x;
}

std::vector<std::array<double, ControlParams::kCount>> lhs_unit(
    const std::array<std::pair<double, double>, ControlParams::kCount>& ranges, std::size_t n, Rng& rng) {
  std::vector<std::array<double, ControlParams::kCount>> out(n);
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < ControlParams::kCount; ++d) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    const auto [lo, hi] = ranges[d];
    for (std::size_t i = 0; i < n; ++i) out[i][d] = draw_in_stratum(rng, lo, hi, perm[i], n);
  }
  return out;
}

}  // namespace

std::vector<ControlParams> latin_hypercube(const ParameterBox& box, std::size_t n, std::uint64_t seed) {
  box.validate();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "latin_hypercube needs n >= 1");
  std::array<std::pair<double, double>, ControlParams::kCount> ranges;
  for (std::size_t d = 0; d < ranges.size(); ++d) ranges[d] = {box.dims[d].lower, box.dims[d].upper};
  Rng rng(seed);
  std::vector<ControlParams> out;
  out.reserve(n);
  for (const auto& x : lhs_unit(ranges, n, rng)) out.push_back(ControlParams::from_array(x));
  return out;
}

std::vector<ControlParams> refine_around(const ControlParams& center, const ParameterBox& box,
                                         const RefineOptions& options, std::uint64_t seed) {
  box.validate();
  const auto c = center.to_array();
  for (std::size_t d = 0; d < c.size(); ++d) {
    if (!(std::isfinite(c[d]) && c[d] > 0.0)) {
      throw Error(ErrorKind::InvalidCenter,
                  "center component " + std::string(ControlParams::kNames[d]) + " must be positive");
    }
  }
  if (options.runs < 1) throw Error(ErrorKind::InvalidArgument, "refinement needs at least one run");
  if (!(options.fraction > 0.0 && options.fraction <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "refinement fraction must lie in (0, 0.5]");
  }

  std::vector<ControlParams> out;
  out.reserve(options.runs);
  out.push_back(options.allow_escape ? center : box.clip(center));
  if (options.runs == 1) return out;

  std::array<std::pair<double, double>, ControlParams::kCount> ranges;
  for (std::size_t d = 0; d < c.size(); ++d) ranges[d] = {c[d] * (1.0 - options.fraction), c[d] * (1.0 + options.fraction)};
  Rng rng(seed);
  for (const auto& x : lhs_unit(ranges, options.runs - 1, rng)) {
    const auto p = ControlParams::from_array(x);
    out.push_back(options.allow_escape ? p : box.clip(p));
  }
  return out;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::initial: return "initial";
    case Provenance::predicted: return "predicted";
    case Provenance::refinement: return "refinement";
  }
  return "initial";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "initial") return Provenance::initial;
  if (s == "predicted") return Provenance::predicted;
  if (s == "refinement") return Provenance::refinement;
  throw Error(ErrorKind::InvalidArgument, "unknown provenance '" + std::string(s) + "'");
}

Ensemble::Ensemble(ParameterBox box, std::uint64_t seed, std::string created)
    : box_(std::move(box)), seed_(seed), created_(std::move(created)) {
  box_.validate();
}

std::size_t Ensemble::valid_count() const {
  return static_cast<std::size_t>(std::count_if(runs_.begin(), runs_.end(), [](const Run& r) { return r.result.valid; }));
}

const Run* Ensemble::find(std::uint64_t id) const {
  if (id < 1 || id > runs_.size()) return nullptr;
  return &runs_[id - 1];
}

std::vector<std::uint64_t> Ensemble::append_runs(std::span<const ControlParams> params,
                                                 std::span<const CycleResult> results, Provenance provenance,
                                                 int iteration) {
  if (params.size() != results.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(params.size()) + " parameter sets but " +
                                               std::to_string(results.size()) + " results");
  }
  if (iteration < 0) throw Error(ErrorKind::InvalidArgument, "iteration id must be non-negative");
  if (provenance == Provenance::initial) {
    for (const auto& p : params) {
      if (!box_.contains(p)) throw Error(ErrorKind::InvalidArgument, "initial run outside the parameter box");
    }
  }
  std::vector<Run> staged;
  staged.reserve(params.size());
  std::vector<std::uint64_t> ids;
  ids.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::uint64_t id = runs_.size() + i + 1;
    staged.push_back(Run{id, params[i], results[i], provenance, iteration});
    ids.push_back(id);
  }
  runs_.insert(runs_.end(), std::make_move_iterator(staged.begin()), std::make_move_iterator(staged.end()));
  return ids;
}

void Ensemble::restore(std::vector<Run> runs) {
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].id != i + 1) {
      throw Error(ErrorKind::SchemaMismatch, "run ids must be dense from 1; found " + std::to_string(runs[i].id) +
                                                 " at position " + std::to_string(i + 1));
    }
  }
  runs_ = std::move(runs);
}

std::string_view to_string(Output o) {
  switch (o) {
    case Output::cop: return "cop";
    case Output::w: return "w";
    case Output::dh_e: return "dh_e";
    case Output::dh_c: return "dh_c";
    case Output::t_subcooling: return "t_subcooling";
    case Output::t_superheating: return "t_superheating";
    case Output::m_dot: return "m_dot";
    case Output::p_low: return "p_low";
    case Output::p_high: return "p_high";
  }
  return "cop";
}

double output_value(const CycleResult& r, Output o) {
  switch (o) {
    case Output::cop: return r.cop;
    case Output::w: return r.w;
    case Output::dh_e: return r.dh_e;
    case Output::dh_c: return r.dh_c;
    case Output::t_subcooling: return r.t_subcooling;
    case Output::t_superheating: return r.t_superheating;
    case Output::m_dot: return r.m_dot;
    case Output::p_low: return r.points[0].pressure;
    case Output::p_high: return r.points[1].pressure;
  }
  return r.cop;
}

Summary summarize(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorKind::EmptySelection, "no values to summarize");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  Summary s;
  s.count = n;
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  return s;
}

std::vector<std::pair<Output, Summary>> iteration_statistics(const Ensemble& ensemble, std::optional<int> iteration) {
  std::vector<const Run*> selected;
  for (const auto& r : ensemble.runs()) {
    if (!r.result.valid) continue;
    const bool match = iteration ? r.iteration == *iteration && r.provenance != Provenance::initial
                                 : r.provenance == Provenance::initial;
    if (match) selected.push_back(&r);
  }
  if (selected.empty()) {
    throw Error(ErrorKind::EmptySelection,
                iteration ? "no valid runs in iteration " + std::to_string(*iteration) : "no valid initial runs");
  }
  std::vector<std::pair<Output, Summary>> out;
  out.reserve(kAllOutputs.size());
  std::vector<double> values(selected.size());
  for (Output o : kAllOutputs) {
    for (std::size_t i = 0; i < selected.size(); ++i) values[i] = output_value(selected[i]->result, o);
    out.emplace_back(o, summarize(values));
  }
  return out;
}

std::vector<int> assign_color_levels(std::size_t k) {
  constexpr int top = kColorLevels - 1;
  std::vector<int> levels(k, 0);
  if (k == 0) return levels;
  if (k == 1) {
    levels[0] = top;
    return levels;
  }
  if (k <= static_cast<std::size_t>(kColorLevels)) {
    for (std::size_t i = 0; i < k; ++i) {
      const double offset = static_cast<double>(k - 1 - i) * top / static_cast<double>(k - 1);
      levels[i] = top - static_cast<int>(std::lround(offset));
    }
    return levels;
  }
  // Newest six keep distinct levels 6..1, older ones share level 0.
  for (std::size_t j = 0; j < static_cast<std::size_t>(top); ++j) levels[k - 1 - j] = top - static_cast<int>(j);
  return levels;
}

// JSON converters (SI units)

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::SchemaMismatch, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw Error(ErrorKind::SchemaMismatch, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

json to_json(const ParameterBox& box) {
  json dims = json::array();
  for (const auto& d : box.dims) dims.push_back({{"name", d.name}, {"lower", d.lower}, {"upper", d.upper}});
  return {{"dimensions", dims}};
}

ParameterBox box_from_json(const json& j) {
  const auto& dims = require(j, "dimensions");
  if (!dims.is_array() || dims.size() != ControlParams::kCount) {
    throw Error(ErrorKind::InvalidBox, "a parameter box needs exactly five dimensions");
  }
  ParameterBox box;
  for (std::size_t d = 0; d < ControlParams::kCount; ++d) {
    box.dims[d] = {require(dims[d], "name").get<std::string>(), number(dims[d], "lower"), number(dims[d], "upper")};
  }
  box.validate();
  return box;
}

json to_json(const ControlParams& p) {
  json j = json::object();
  const auto x = p.to_array();
  for (std::size_t d = 0; d < x.size(); ++d) j[std::string(ControlParams::kNames[d])] = x[d];
  return j;
}

ControlParams params_from_json(const json& j) {
  std::array<double, ControlParams::kCount> x{};
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = number(j, std::string(ControlParams::kNames[d]).c_str());
  return ControlParams::from_array(x);
}

json to_json(const CycleSpecification& s) {
  return {{"p_low", s.p_low},
          {"p_high", s.p_high},
          {"subcooling", s.subcooling},
          {"superheat", s.superheat},
          {"eta_isentropic", s.eta_isentropic}};
}

CycleSpecification spec_from_json(const json& j) {
  CycleSpecification s;
  s.p_low = number(j, "p_low");
  s.p_high = number(j, "p_high");
  s.subcooling = number(j, "subcooling");
  s.superheat = number(j, "superheat");
  s.eta_isentropic = j.contains("eta_isentropic") ? number(j, "eta_isentropic") : kDefaultIsentropicEfficiency;
  return s;
}

json to_json(const IterationRecord& r) {
  json j = {{"id", r.id},
            {"name", r.name},
            {"spec", to_json(r.spec)},
            {"predicted_params", to_json(r.predicted_params)},
            {"predicted_assessment",
             {{"q_evap", r.predicted_assessment.q_evap},
              {"q_cond", r.predicted_assessment.q_cond},
              {"w_comp", r.predicted_assessment.w_comp},
              {"cop", r.predicted_assessment.cop}}},
            {"center_run_id", r.center_run_id ? json(*r.center_run_id) : json(nullptr)},
            {"refinement_run_ids", r.refinement_run_ids},
            {"visible", r.visible},
            {"predicted_color", r.predicted_color},
            {"simulated_color", r.simulated_color},
            {"notes", r.notes}};
  return j;
}

IterationRecord iteration_from_json(const json& j) {
  IterationRecord r;
  r.id = require(j, "id").get<int>();
  r.name = require(j, "name").get<std::string>();
  r.spec = spec_from_json(require(j, "spec"));
  r.predicted_params = params_from_json(require(j, "predicted_params"));
  const auto& a = require(j, "predicted_assessment");
  r.predicted_assessment = {number(a, "q_evap"), number(a, "q_cond"), number(a, "w_comp"), number(a, "cop")};
  const auto& c = require(j, "center_run_id");
  if (!c.is_null()) r.center_run_id = c.get<std::uint64_t>();
  r.refinement_run_ids = require(j, "refinement_run_ids").get<std::vector<std::uint64_t>>();
  r.visible = require(j, "visible").get<bool>();
  r.predicted_color = require(j, "predicted_color").get<int>();
  r.simulated_color = require(j, "simulated_color").get<int>();
  r.notes = j.value("notes", std::string());
  if (r.predicted_color < 0 || r.predicted_color >= kColorLevels || r.simulated_color < 0 ||
      r.simulated_color >= kColorLevels) {
    throw Error(ErrorKind::SchemaMismatch, "color levels must lie in 0-6");
  }
  return r;
}

json to_json(const Finding& f) {
  return {{"name", f.name}, {"case_ids", f.case_ids}, {"visible", f.visible}, {"color", f.color}, {"note", f.note}};
}

Finding finding_from_json(const json& j) {
  Finding f;
  f.name = require(j, "name").get<std::string>();
  f.case_ids = require(j, "case_ids").get<std::vector<std::uint64_t>>();
  f.visible = j.value("visible", true);
  f.color = j.value("color", 0);
  f.note = j.value("note", std::string());
  return f;
}

json to_json(const PlantConfig& c) {
  return {{"t_ambient", c.t_ambient},
          {"ua_cond", c.ua_cond},
          {"ua_evap", c.ua_evap},
          {"ua_evap_vapor_ratio", c.ua_evap_vapor_ratio},
          {"ua_subcool", c.ua_subcool},
          {"v_disp", c.v_disp},
          {"eta_isentropic", c.eta_isentropic},
          {"eta_vol_a", c.eta_vol_a},
          {"eta_vol_b", c.eta_vol_b},
          {"cd_valve", c.cd_valve},
          {"cp_air", c.cp_air},
          {"residual_tolerance", c.residual_tolerance},
          {"max_outer_iterations", c.max_outer_iterations},
          {"max_inner_iterations", c.max_inner_iterations},
          {"inner_damping", c.inner_damping}};
}

PlantConfig plant_from_json(const json& j) {
  // Missing keys keep their defaults so partial documents are accepted.
  PlantConfig c;
  if (!j.is_object()) throw Error(ErrorKind::SchemaMismatch, "plant config must be an object");
  auto opt = [&](const char* key, double& field) {
    if (j.contains(key)) field = number(j, key);
  };
  opt("t_ambient", c.t_ambient);
  opt("ua_cond", c.ua_cond);
  opt("ua_evap", c.ua_evap);
  opt("ua_evap_vapor_ratio", c.ua_evap_vapor_ratio);
  opt("ua_subcool", c.ua_subcool);
  opt("v_disp", c.v_disp);
  opt("eta_isentropic", c.eta_isentropic);
  opt("eta_vol_a", c.eta_vol_a);
  opt("eta_vol_b", c.eta_vol_b);
  opt("cd_valve", c.cd_valve);
  opt("cp_air", c.cp_air);
  opt("residual_tolerance", c.residual_tolerance);
  opt("inner_damping", c.inner_damping);
  if (j.contains("max_outer_iterations")) c.max_outer_iterations = require(j, "max_outer_iterations").get<int>();
  if (j.contains("max_inner_iterations")) c.max_inner_iterations = require(j, "max_inner_iterations").get<int>();
  for (const auto& [key, _] : j.items()) {
    static const std::vector<std::string> known = {
        "t_ambient", "ua_cond", "ua_evap", "ua_evap_vapor_ratio", "ua_subcool", "v_disp", "eta_isentropic",
        "eta_vol_a", "eta_vol_b", "cd_valve", "cp_air", "residual_tolerance", "max_outer_iterations",
        "max_inner_iterations", "inner_damping"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorKind::SchemaMismatch, "unknown plant config field '" + key + "'");
    }
  }
  validate(c);
  return c;
}

}  // namespace idoe
