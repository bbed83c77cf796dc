#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "idoe/cycle_sim.hpp"
#include "idoe/cycle_spec.hpp"

namespace idoe {

struct Dimension {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  friend bool operator==(const Dimension&, const Dimension&) = default;
};

/// Sampling box over the five control parameters, in ControlParams order.
struct ParameterBox {
  std::array<Dimension, ControlParams::kCount> dims;

  /// n_pump 800-8000 rev/min, mf_air_cond 0.1-1.0 kg/s, t_air_cabin
  /// 20-50 C, mf_air_evap 0.05-0.5 kg/s, a_eff_valve 0.5-5 mm2.
  static ParameterBox defaults();

  /// Throws InvalidBox.
  void validate() const;
  bool contains(const ControlParams& p) const;
  ControlParams clip(const ControlParams& p) const;

  friend bool operator==(const ParameterBox&, const ParameterBox&) = default;
};

/// Stratum index of x among n equal-width strata of [lo, hi].
std::size_t stratum_of(double x, double lo, double hi, std::size_t n);

/// Latin hypercube design: per dimension exactly one sample in each of the
/// n equal-width strata, uniform within its stratum. Deterministic in seed.
std::vector<ControlParams> latin_hypercube(const ParameterBox& box, std::size_t n, std::uint64_t seed);

struct RefineOptions {
  std::size_t runs = 20;
  double fraction = 0.05;
  bool allow_escape = false;  // keep points outside the box instead of clipping
};

/// Refinement batch around a predicted center: the center itself first,
/// then n - 1 Latin hypercube samples in center * [1 - fraction, 1 + fraction]
/// per dimension. Throws InvalidCenter / InvalidArgument.
std::vector<ControlParams> refine_around(const ControlParams& center, const ParameterBox& box,
                                         const RefineOptions& options, std::uint64_t seed);

enum class Provenance { initial, predicted, refinement };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Run {
  std::uint64_t id = 0;
  ControlParams params;
  CycleResult result;
  Provenance provenance = Provenance::initial;
  int iteration = 0;  // 0 for the initial ensemble
};

/// Append-only collection of simulation runs. Run ids are dense from 1 and
/// never reassigned.
class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(ParameterBox box, std::uint64_t seed, std::string created);

  const ParameterBox& box() const { return box_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& created() const { return created_; }
  const std::vector<Run>& runs() const { return runs_; }
  std::size_t size() const { return runs_.size(); }
  std::size_t valid_count() const;
  const Run* find(std::uint64_t id) const;

  /// All-or-nothing append. Throws LengthMismatch.
  std::vector<std::uint64_t> append_runs(std::span<const ControlParams> params, std::span<const CycleResult> results,
                                         Provenance provenance, int iteration);

  /// Replaces the run list from persisted storage; ids must be dense from 1.
  void restore(std::vector<Run> runs);

 private:
  ParameterBox box_ = ParameterBox::defaults();
  std::uint64_t seed_ = 0;
  std::string created_;
  std::vector<Run> runs_;
};

enum class Output { cop, w, dh_e, dh_c, t_subcooling, t_superheating, m_dot, p_low, p_high };

inline constexpr std::array<Output, 9> kAllOutputs = {Output::cop,          Output::w,
                                                      Output::dh_e,         Output::dh_c,
                                                      Output::t_subcooling, Output::t_superheating,
                                                      Output::m_dot,        Output::p_low,
                                                      Output::p_high};

std::string_view to_string(Output o);
double output_value(const CycleResult& r, Output o);

struct Summary {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Quartiles by linear interpolation between order statistics. Throws
/// EmptySelection.
Summary summarize(std::vector<double> values);

/// Summaries of every output over valid runs of one iteration, or of the
/// initial ensemble when `iteration` is empty.
std::vector<std::pair<Output, Summary>> iteration_statistics(const Ensemble& ensemble,
                                                             std::optional<int> iteration);

struct SpecificAssessment {
  double q_evap = 0.0;
  double q_cond = 0.0;
  double w_comp = 0.0;
  double cop = 0.0;
};

inline constexpr int kColorLevels = 7;

struct IterationRecord {
  int id = 0;
  std::string name;
  CycleSpecification spec;
  ControlParams predicted_params;
  SpecificAssessment predicted_assessment;
  std::optional<std::uint64_t> center_run_id;
  std::vector<std::uint64_t> refinement_run_ids;
  bool visible = true;
  int predicted_color = kColorLevels - 1;
  int simulated_color = kColorLevels - 1;
  std::string notes;
};

struct Finding {
  std::string name;
  std::vector<std::uint64_t> case_ids;
  bool visible = true;
  int color = 0;
  std::string note;
};

/// Color levels for k visible iterations, oldest first. The newest gets the
/// darkest level 6; with k <= 7 levels are spread over 0..6, beyond that the
/// oldest share level 0.
std::vector<int> assign_color_levels(std::size_t k);

// Persistence: CSV for runs, JSON for the rest (SI units).
const std::vector<std::string>& ensemble_csv_columns();
std::string export_csv(std::span<const Run> runs);
std::string export_csv(const Ensemble& ensemble, std::span<const std::uint64_t> ids);
/// Throws SchemaMismatch naming the offending column.
std::vector<Run> import_csv(std::string_view document, const RefrigerantModel& model = RefrigerantModel::r134a());

nlohmann::json to_json(const ParameterBox& box);
ParameterBox box_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ControlParams& p);
ControlParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CycleSpecification& s);
CycleSpecification spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Finding& f);
Finding finding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlantConfig& c);
PlantConfig plant_from_json(const nlohmann::json& j);

}  // namespace idoe
