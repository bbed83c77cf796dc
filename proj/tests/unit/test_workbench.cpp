#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "idoe/error.hpp"
#include "idoe/json_io.hpp"
#include "idoe/replay.hpp"
#include "idoe/workbench.hpp"
#include "../support/generators.hpp"

using namespace idoe;
using idoe::testing::rel;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an idoe::Error";
  return ErrorKind::InvalidArgument;
}

SessionOptions small_options(std::uint64_t seed = 3) {
  SessionOptions o;
  o.name = "small";
  o.initial_runs = 400;
  o.seed = seed;
  o.train.hidden = 12;
  o.train.epochs = 30;
  o.train.batch_size = 32;
  o.train.learning_rate = 3e-3;
  o.train.online_epochs = 5;
  o.baseline = default_baseline_params();
  return o;
}

CycleSpecification baseline_spec() { return {2.5e5, 12e5, 7.0, 8.0, 0.7}; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("idoe-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
             std::to_string(counter++) + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

json small_script() {
  return {{"name", "small"},
          {"session", {{"initial_runs", 400}, {"seed", 3}, {"train", {{"hidden", 12}, {"epochs", 30}, {"batch_size", 32}}}}},
          {"baseline",
           {{"spec", {{"p_low", 2.5}, {"p_high", 12.0}, {"subcooling", 7.0}, {"superheat", 8.0}}}, {"params", "default"}}},
          {"refine", {{"runs", 6}, {"fraction", 0.05}}},
          {"iterations", json::array()}};
}

}  // namespace

class WorkbenchTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    wb_ = new Workbench();
    id_ = wb_->create_session(small_options());
  }
  static void TearDownTestSuite() {
    delete wb_;
    wb_ = nullptr;
  }
  static Workbench* wb_;
  static std::string id_;
};
Workbench* WorkbenchTest::wb_ = nullptr;
std::string WorkbenchTest::id_;

TEST(SessionOptionsJson, BoundaryUnits) {
  const json doc = {{"name", "x"},
                    {"initial_runs", 300},
                    {"seed", 9},
                    {"train", {{"hidden", 8}}},
                    {"plant", {{"ua_cond", 900.0}}},
                    {"baseline",
                     {{"n_pump", 2000}, {"mf_air_cond", 0.4}, {"t_air_cabin", 25.0}, {"mf_air_evap", 0.2}, {"a_eff_valve", 2e-6}}}};
  const auto o = session_options_from_json(doc);
  EXPECT_EQ(o.name, "x");
  EXPECT_EQ(o.initial_runs, 300u);
  EXPECT_EQ(o.seed, 9u);
  EXPECT_EQ(o.train.hidden, 8u);
  EXPECT_EQ(o.plant.ua_cond, 900.0);
  ASSERT_TRUE(o.baseline);
  EXPECT_DOUBLE_EQ(o.baseline->t_air_cabin, 298.15);
  EXPECT_EQ(o.baseline->a_eff_valve, 2e-6);
  EXPECT_EQ(session_options_from_json({{"baseline", "default"}}).baseline, default_baseline_params());
  EXPECT_FALSE(session_options_from_json(json::object()).baseline);
  EXPECT_EQ(kind_of([] { session_options_from_json({{"seed", "one"}}); }), ErrorKind::SchemaMismatch);
  EXPECT_EQ(kind_of([] { session_options_from_json({{"initial_runs", -5}}); }), ErrorKind::SchemaMismatch);
}

TEST(JsonIo, SpecAndParamsUnits) {
  const auto s = api::spec_from({{"p_low", 2.5}, {"p_high", 12.0}, {"subcooling", 7.0}, {"superheat", 8.0}});
  EXPECT_DOUBLE_EQ(s.p_low, 2.5e5);
  EXPECT_DOUBLE_EQ(s.p_high, 12e5);
  EXPECT_DOUBLE_EQ(s.eta_isentropic, 0.7);
  const auto back = api::spec_from(api::spec_json(s));
  EXPECT_LT(rel(back.p_low, s.p_low), 1e-15);
  const auto p = default_baseline_params();
  const auto j = api::params_json(p);
  EXPECT_NEAR(j["t_air_cabin"].get<double>(), p.t_air_cabin - 273.15, 1e-12);
  EXPECT_LT(rel(api::params_from(j).t_air_cabin, p.t_air_cabin), 1e-15);
  EXPECT_EQ(kind_of([] { api::spec_from({{"p_low", "2"}}); }), ErrorKind::SchemaMismatch);
  EXPECT_TRUE(api::number(NAN).is_null());

  const auto r = simulate(p, PlantConfig{});
  const auto rj = api::result_json(r);
  EXPECT_NEAR(rj["points"][0]["p"].get<double>(), r.points[0].pressure / 1e5, 1e-12);
  EXPECT_NEAR(rj["points"][0]["h"].get<double>(), r.points[0].enthalpy / 1e3, 1e-9);
  EXPECT_NEAR(rj["cop"].get<double>(), r.cop, 1e-12);
}

TEST_F(WorkbenchTest, CreatedSessionState) {
  const auto s = wb_->session(id_);
  s->read([](const SessionState& st) {
    EXPECT_EQ(st.ensemble.size(), 400u);
    EXPECT_TRUE(st.net && st.net->trained());
    EXPECT_TRUE(st.baseline && st.baseline->result.valid);
    EXPECT_EQ(st.baseline->id, 0u);
    for (const auto& h : st.hulls) EXPECT_TRUE(h.has_value());
    EXPECT_GT(st.training.n_test, 0u);
  });
  EXPECT_EQ(kind_of([] { wb_->session("nope"); }), ErrorKind::NotFound);
  EXPECT_NE(std::find(wb_->session_ids().begin(), wb_->session_ids().end(), id_), wb_->session_ids().end());
}

TEST_F(WorkbenchTest, ProposeAppendsIterations) {
  const auto a = wb_->propose(id_, baseline_spec());
  const auto b = wb_->propose(id_, baseline_spec());
  EXPECT_EQ(b.record.id, a.record.id + 1);
  EXPECT_EQ(a.record.predicted_params, b.record.predicted_params);
  EXPECT_NE(a.record.center_run_id, b.record.center_run_id);
  EXPECT_TRUE(ParameterBox::defaults().contains(a.record.predicted_params));
  EXPECT_EQ(a.record.name, "Iteration " + std::to_string(a.record.id));
  wb_->session(id_)->read([&](const SessionState& st) {
    const auto* run = st.ensemble.find(b.record.center_run_id.value());
    ASSERT_NE(run, nullptr);
    EXPECT_EQ(run->provenance, Provenance::predicted);
    EXPECT_EQ(run->iteration, b.record.id);
    EXPECT_EQ(st.iterations.back().predicted_color, 6);
  });
  if (a.center.valid) {
    EXPECT_LT(rel(a.record.predicted_assessment.cop, a.center.cop), 1e-12);
  } else {
    EXPECT_TRUE(std::isnan(a.record.predicted_assessment.cop));
  }

  auto bad = baseline_spec();
  bad.p_high = bad.p_low;
  EXPECT_EQ(kind_of([&] { wb_->propose(id_, bad); }), ErrorKind::InfeasibleSpec);
  EXPECT_EQ(kind_of([&] { wb_->propose("nope", baseline_spec()); }), ErrorKind::NotFound);
}

TEST_F(WorkbenchTest, RefineGrowsEnsembleByBatch) {
  const auto p = wb_->propose(id_, baseline_spec());
  const auto before = wb_->session(id_)->read([](const SessionState& st) { return st.ensemble.size(); });
  const auto job = wb_->wait(wb_->refine(id_, p.record.id, 20, 0.05));
  EXPECT_EQ(job.status, JobStatus::done) << job.error;
  ASSERT_EQ(job.run_ids.size(), 20u);
  wb_->session(id_)->read([&](const SessionState& st) {
    EXPECT_EQ(st.ensemble.size(), before + 20);
    const auto& rec = st.iterations[static_cast<std::size_t>(p.record.id - 1)];
    EXPECT_EQ(rec.refinement_run_ids, job.run_ids);
    const auto c = rec.predicted_params.to_array();
    for (const auto id : job.run_ids) {
      const auto* run = st.ensemble.find(id);
      ASSERT_NE(run, nullptr);
      EXPECT_EQ(run->provenance, Provenance::refinement);
      const auto v = run->params.to_array();
      for (std::size_t d = 0; d < v.size(); ++d) EXPECT_LE(std::abs(v[d] / c[d] - 1.0), 0.05 + 1e-12);
    }
  });
  ASSERT_TRUE(job.online.has_value());
  EXPECT_LE(job.online->mse_after, job.online->mse_before);
  const auto stats = wb_->statistics(id_, p.record.id);
  // The iteration's predicted center run counts alongside its refinement runs.
  EXPECT_EQ(stats.front().second.count, job.valid_runs + (p.center.valid ? 1u : 0u));
}

TEST_F(WorkbenchTest, RefineErrors) {
  const auto p = wb_->propose(id_, baseline_spec());
  EXPECT_EQ(kind_of([&] { wb_->refine(id_, 999); }), ErrorKind::NotFound);
  EXPECT_EQ(kind_of([&] { wb_->refine(id_, p.record.id, 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { wb_->refine(id_, p.record.id, 20, 0.7); }), ErrorKind::InvalidArgument);
  // A long batch keeps the job active while the second request arrives.
  const auto first = wb_->refine(id_, p.record.id, 2000, 0.05);
  EXPECT_EQ(kind_of([&] { wb_->refine(id_, p.record.id); }), ErrorKind::JobAlreadyRunning);
  EXPECT_EQ(wb_->wait(first).status, JobStatus::done);
  EXPECT_EQ(wb_->wait(wb_->refine(id_, p.record.id, 3)).status, JobStatus::done);
  EXPECT_EQ(kind_of([] { wb_->job(987654); }), ErrorKind::NotFound);
}

TEST_F(WorkbenchTest, PatchAndRecolor) {
  const auto p = wb_->propose(id_, baseline_spec());
  IterationPatch patch;
  patch.name = "renamed";
  patch.notes = "hidden for now";
  patch.visible = false;
  const auto rec = wb_->patch_iteration(id_, p.record.id, patch);
  EXPECT_EQ(rec.name, "renamed");
  EXPECT_FALSE(rec.visible);
  wb_->session(id_)->read([&](const SessionState& st) {
    std::vector<int> levels;
    for (const auto& r : st.iterations) {
      if (!r.visible) continue;
      levels.push_back(r.predicted_color);
      EXPECT_EQ(r.predicted_color, r.simulated_color);
    }
    EXPECT_EQ(levels, assign_color_levels(levels.size()));
  });
  EXPECT_EQ(kind_of([&] { wb_->patch_iteration(id_, 999, patch); }), ErrorKind::NotFound);
  patch.visible = true;
  wb_->patch_iteration(id_, p.record.id, patch);
}

TEST_F(WorkbenchTest, FindingsAndExport) {
  const Finding f = wb_->add_finding(id_, {"low cop", {1, 2, 3}, true, 2, "check these"});
  EXPECT_EQ(f.case_ids.size(), 3u);
  wb_->session(id_)->read([](const SessionState& st) { EXPECT_EQ(st.findings.back().name, "low cop"); });
  EXPECT_EQ(kind_of([] { wb_->add_finding(id_, {"x", {999999}, true, 0, ""}); }), ErrorKind::NotFound);
  EXPECT_EQ(kind_of([] { wb_->add_finding(id_, {"x", {1}, true, 9, ""}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { wb_->add_finding(id_, {"", {1}, true, 0, ""}); }), ErrorKind::InvalidArgument);

  const std::vector<std::uint64_t> ids = {1, 2, 3};
  const auto runs = import_csv(wb_->export_csv(id_, ids));
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[2].id, 3u);
}

TEST_F(WorkbenchTest, StatisticsOverInitialRuns) {
  const auto stats = wb_->statistics(id_, std::nullopt);
  ASSERT_FALSE(stats.empty());
  EXPECT_GT(stats.front().second.count, 100u);
  EXPECT_EQ(kind_of([] { wb_->statistics(id_, 999); }), ErrorKind::NotFound);
}

TEST(WorkbenchPersistence, SaveLoadFingerprint) {
  TempDir tmp;
  Workbench wb;
  const auto id = wb.create_session(small_options());
  const auto p = wb.propose(id, baseline_spec());
  wb.wait(wb.refine(id, p.record.id, 10));
  wb.add_finding(id, {"f", {1, 5}, false, 1, "n"});
  wb.save(id, tmp.path() / "s");
  for (const char* f : {"ensemble.csv", "session.json", "model.json", "iterations.json"}) {
    EXPECT_TRUE(fs::exists(tmp.path() / "s" / f)) << f;
  }

  const auto original = wb.session(id)->read([](const SessionState& st) { return fingerprint(st); });
  const auto loaded = load_session(tmp.path() / "s");
  EXPECT_EQ(fingerprint(loaded), original);
  EXPECT_TRUE(loaded.net->bit_equal(*wb.session(id)->read([](const SessionState& st) { return st.net; })));
  ASSERT_TRUE(loaded.baseline);

  Workbench other;
  const auto reopened = other.open_session(tmp.path() / "s");
  EXPECT_EQ(other.session(reopened)->read([](const SessionState& st) { return fingerprint(st); }), original);
  // The reopened session keeps working.
  const auto q = other.propose(reopened, baseline_spec());
  EXPECT_EQ(q.record.id, p.record.id + 1);
}

TEST(WorkbenchPersistence, StorageRootReloadsSessions) {
  TempDir tmp;
  std::string id;
  SessionFingerprint fp;
  {
    Workbench wb(tmp.path());
    id = wb.create_session(small_options());
    wb.propose(id, baseline_spec());
    fp = wb.session(id)->read([](const SessionState& st) { return fingerprint(st); });
  }
  Workbench again(tmp.path());
  EXPECT_EQ(again.session(id)->read([](const SessionState& st) { return fingerprint(st); }), fp);
  const auto fresh = again.create_session(small_options(4));
  EXPECT_NE(fresh, id);
}

TEST(WorkbenchPersistence, LoadErrors) {
  TempDir tmp;
  EXPECT_THROW(load_session(tmp.path() / "missing"), Error);
  fs::create_directories(tmp.path() / "broken");
  std::ofstream(tmp.path() / "broken" / "session.json") << "{not json";
  EXPECT_THROW(load_session(tmp.path() / "broken"), Error);
}

TEST(WorkbenchDeterminism, SameSeedSameSession) {
  Workbench a;
  Workbench b;
  const auto ia = a.create_session(small_options(5));
  const auto ib = b.create_session(small_options(5));
  const auto pa = a.propose(ia, baseline_spec());
  const auto pb = b.propose(ib, baseline_spec());
  EXPECT_EQ(pa.record.predicted_params, pb.record.predicted_params);
  const auto ja = a.wait(a.refine(ia, pa.record.id));
  const auto jb = b.wait(b.refine(ib, pb.record.id));
  EXPECT_EQ(ja.run_ids, jb.run_ids);
  const auto fa = a.session(ia)->read([](const SessionState& st) { return fingerprint(st); });
  const auto fb = b.session(ib)->read([](const SessionState& st) { return fingerprint(st); });
  EXPECT_EQ(fa.ensemble, fb.ensemble);
  EXPECT_EQ(fa.net, fb.net);
}

TEST(WorkbenchCreate, InvalidOptions) {
  Workbench wb;
  auto o = small_options();
  o.initial_runs = 0;
  EXPECT_EQ(kind_of([&] { wb.create_session(o); }), ErrorKind::InvalidArgument);
  o = small_options();
  o.initial_runs = 50;
  EXPECT_EQ(kind_of([&] { wb.create_session(o); }), ErrorKind::DatasetTooSmall);
  o = small_options();
  o.box.dims[0].upper = o.box.dims[0].lower;
  EXPECT_EQ(kind_of([&] { wb.create_session(o); }), ErrorKind::InvalidBox);
  EXPECT_TRUE(wb.session_ids().empty());
}

TEST(Replay, EmptyIterationList) {
  Workbench wb;
  const auto t = replay_usecase(small_script(), wb);
  EXPECT_TRUE(t["steps"].empty());
  EXPECT_EQ(t["session"]["runs"], 400);
  EXPECT_TRUE(t["baseline_cop"].is_number());
  EXPECT_TRUE(t["final_median_cop"].is_null());
}

TEST(Replay, BadStepRecordedAndReplayContinues) {
  Workbench wb;
  auto doc = small_script();
  doc["iterations"] = json::array(
      {{{"name", "inverted"}, {"spec", {{"p_low", 12.0}, {"p_high", 2.5}, {"subcooling", 5.0}, {"superheat", 5.0}}}},
       {{"name", "fine"}, {"spec", {{"p_low", 2.5}, {"p_high", 12.0}, {"subcooling", 7.0}, {"superheat", 8.0}}}}});
  const auto t = replay_usecase(doc, wb);
  ASSERT_EQ(t["steps"].size(), 2u);
  EXPECT_FALSE(t["steps"][0]["ok"].get<bool>());
  EXPECT_EQ(t["steps"][0]["error"]["kind"], "InfeasibleSpec");
  EXPECT_TRUE(t["steps"][1]["ok"].get<bool>());
  EXPECT_EQ(t["steps"][1]["refinement"]["runs"], 6);
  EXPECT_LE(t["steps"][1]["refinement"]["max_relative_deviation"].get<double>(), 0.05 + 1e-12);
  const auto sid = t["session"]["id"].get<std::string>();
  wb.session(sid)->read([](const SessionState& st) {
    ASSERT_EQ(st.iterations.size(), 1u);
    EXPECT_EQ(st.iterations[0].name, "fine");
  });
}

TEST(Replay, ScriptSchema) {
  EXPECT_EQ(kind_of([] { parse_script(json::array()); }), ErrorKind::ScriptSchema);
  auto doc = small_script();
  doc.erase("iterations");
  EXPECT_EQ(kind_of([&] { parse_script(doc); }), ErrorKind::ScriptSchema);
  doc = small_script();
  doc["iterations"] = json::array({{{"name", "no spec"}}});
  EXPECT_EQ(kind_of([&] { parse_script(doc); }), ErrorKind::ScriptSchema);
  doc = small_script();
  doc["refine"]["runs"] = "many";
  EXPECT_EQ(kind_of([&] { parse_script(doc); }), ErrorKind::ScriptSchema);
  doc = small_script();
  doc["baseline"].erase("spec");
  EXPECT_EQ(kind_of([&] { parse_script(doc); }), ErrorKind::ScriptSchema);

  std::ifstream in(IDOE_DATA_DIR "/usecase.json");
  const auto shipped = parse_script(json::parse(in));
  EXPECT_EQ(shipped.steps.size(), 3u);
  EXPECT_FALSE(shipped.baseline_params.has_value());
  EXPECT_EQ(shipped.session.initial_runs, 5000u);
  EXPECT_DOUBLE_EQ(shipped.steps[0].spec.subcooling, 20.0);
}
