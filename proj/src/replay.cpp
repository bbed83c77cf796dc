#include "idoe/replay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idoe/error.hpp"
#include "idoe/json_io.hpp"

namespace idoe {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorKind::ScriptSchema, msg); }

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema(where + ": missing '" + key + "'");
  return j.at(key);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    schema(where + ": '" + key + "' has the wrong type");
  }
}

CycleSpecification spec_at(const json& j, const std::string& where) {
  try {
    return api::spec_from(j);
  } catch (const Error& e) {
    schema(where + ": " + e.what());
  }
}

double max_relative_deviation(const ControlParams& center, const ControlParams& p) {
  const auto c = center.to_array();
  const auto v = p.to_array();
  double worst = 0.0;
  for (std::size_t d = 0; d < c.size(); ++d) worst = std::max(worst, std::abs(v[d] / c[d] - 1.0));
  return worst;
}

}  // namespace

ReplayScript parse_script(const json& doc) {
  if (!doc.is_object()) schema("script must be a JSON object");
  ReplayScript s;
  s.name = get_or<std::string>(doc, "name", s.name, "script");

  try {
    s.session = session_options_from_json(doc.value("session", json::object()));
  } catch (const Error& e) {
    schema(std::string("session: ") + e.what());
  }
  if (!doc.contains("session") || !doc.at("session").contains("name")) s.session.name = s.name;

  const auto& bj = member(doc, "baseline", "script");
  s.baseline_spec = spec_at(member(bj, "spec", "baseline"), "baseline.spec");
  if (bj.contains("params")) {
    const auto& pj = bj.at("params");
    if (pj.is_string() && pj.get<std::string>() == "default") {
      s.baseline_params = default_baseline_params();
    } else if (pj.is_object()) {
      try {
        s.baseline_params = api::params_from(pj);
      } catch (const Error& e) {
        schema(std::string("baseline.params: ") + e.what());
      }
    } else if (!pj.is_null()) {
      schema("baseline.params must be an object, \"default\" or null");
    }
  }

  std::size_t runs = 20;
  double fraction = 0.05;
  if (doc.contains("refine")) {
    runs = get_or<std::size_t>(doc.at("refine"), "runs", runs, "refine");
    fraction = get_or<double>(doc.at("refine"), "fraction", fraction, "refine");
  }

  const auto& its = member(doc, "iterations", "script");
  if (!its.is_array()) schema("iterations must be an array");
  for (std::size_t i = 0; i < its.size(); ++i) {
    const std::string where = "iterations[" + std::to_string(i) + "]";
    const auto& ij = its[i];
    if (!ij.is_object()) schema(where + " must be an object");
    ReplayStep step;
    step.name = get_or<std::string>(ij, "name", "Iteration " + std::to_string(i + 1), where);
    step.spec = spec_at(member(ij, "spec", where), where + ".spec");
    step.runs = get_or<std::size_t>(ij, "runs", runs, where);
    step.fraction = get_or<double>(ij, "fraction", fraction, where);
    s.steps.push_back(step);
  }
  return s;
}

json replay_usecase(const json& doc, Workbench& wb) { return replay_usecase(parse_script(doc), wb); }

json replay_usecase(const ReplayScript& script, Workbench& wb) {
  json transcript = {{"name", script.name}};

  // Baseline first: it does not depend on the ensemble.
  SessionOptions opts = script.session;
  json calibration = nullptr;
  if (script.baseline_params) {
    opts.baseline = script.baseline_params;
  } else {
    const CalibrationTarget target{script.baseline_spec.p_low, script.baseline_spec.p_high,
                                   script.baseline_spec.subcooling, script.baseline_spec.superheat};
    const auto cal = calibrate(opts.plant, opts.box, target);
    opts.baseline = cal.params;
    calibration = {{"max_relative_error", api::number(cal.max_relative_error)},
                   {"evaluations", cal.evaluations},
                   {"within_tolerance", cal.within_tolerance}};
  }

  const std::string sid = wb.create_session(opts);
  auto session = wb.session(sid);
  const json summary = session->read([](const SessionState& s) { return session_summary_json(s); });
  transcript["session"] = {{"id", sid},
                           {"runs", summary["runs"]},
                           {"valid_runs", summary["valid_runs"]},
                           {"test_mse", summary["model"]["test_mse"]}};

  const Run baseline = session->read([](const SessionState& s) { return *s.baseline; });
  const double baseline_cop = baseline.result.valid ? baseline.result.cop : std::numeric_limits<double>::quiet_NaN();
  transcript["baseline"] = {{"spec", api::spec_json(script.baseline_spec)},
                            {"params", api::params_json(baseline.params)},
                            {"result", api::result_json(baseline.result)},
                            {"cop", api::number(baseline_cop)},
                            {"calibration", calibration}};

  const ParameterBox box = session->read([](const SessionState& s) { return s.ensemble.box(); });
  json steps = json::array();
  std::optional<double> last_median;
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const auto& step = script.steps[i];
    json entry = {{"index", i + 1}, {"name", step.name}, {"spec", api::spec_json(step.spec)}, {"ok", false}};
    try {
      const auto proposal = wb.propose(sid, step.spec);
      const int k = proposal.record.id;
      wb.patch_iteration(sid, k, {step.name, std::nullopt, std::nullopt});
      entry["iteration"] = k;
      entry["prediction"] = api::params_json(proposal.record.predicted_params);
      entry["prediction_in_box"] = box.contains(proposal.record.predicted_params);
      entry["inside_hull"] = proposal.inside_hull;
      entry["center"] = api::result_json(proposal.center);
      entry["assessment"] = api::assessment_json(proposal.record.predicted_assessment);

      const auto job = wb.wait(wb.refine(sid, k, step.runs, step.fraction));
      if (job.status != JobStatus::done) throw Error(ErrorKind::NoConvergence, "refinement failed: " + job.error);

      const auto runs = session->read([&](const SessionState& s) {
        std::vector<Run> out;
        for (const auto id : job.run_ids) out.push_back(*s.ensemble.find(id));
        return out;
      });
      double deviation = 0.0;
      std::vector<double> cops;
      for (const auto& r : runs) {
        deviation = std::max(deviation, max_relative_deviation(proposal.record.predicted_params, r.params));
        if (r.result.valid) cops.push_back(r.result.cop);
      }
      json refinement = {{"job", job.id},
                         {"runs", runs.size()},
                         {"valid_runs", cops.size()},
                         {"max_relative_deviation", deviation},
                         {"cop", nullptr},
                         {"median_cop", nullptr},
                         {"exceeds_baseline", nullptr}};
      if (job.online) {
        refinement["online"] = {{"mse_before", job.online->mse_before},
                                {"mse_after", job.online->mse_after},
                                {"accepted", job.online->accepted}};
      }
      if (!cops.empty()) {
        const auto s = summarize(cops);
        refinement["cop"] = api::summary_json(s, Output::cop);
        refinement["median_cop"] = s.median;
        refinement["exceeds_baseline"] = s.median > baseline_cop;
        last_median = s.median;
      } else {
        last_median.reset();
      }
      entry["refinement"] = refinement;
      entry["ok"] = true;
    } catch (const Error& e) {
      entry["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
      last_median.reset();
    }
    steps.push_back(entry);
  }
  transcript["steps"] = steps;
  transcript["baseline_cop"] = api::number(baseline_cop);
  transcript["final_median_cop"] = last_median ? json(*last_median) : json(nullptr);
  return transcript;
}

}  // namespace idoe
