#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "idoe/calibration.hpp"
#include "idoe/doe.hpp"
#include "idoe/error.hpp"
#include "../support/generators.hpp"

using namespace idoe;
using idoe::testing::random_params;
using idoe::testing::rel;

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

void expect_stratified(const std::vector<ControlParams>& ps, const ParameterBox& box) {
  const std::size_t n = ps.size();
  for (std::size_t d = 0; d < ControlParams::kCount; ++d) {
    std::vector<int> hits(n, 0);
    for (const auto& p : ps) {
      const double x = p.to_array()[d];
      ASSERT_GE(x, box.dims[d].lower);
      ASSERT_LT(x, box.dims[d].upper);
      ++hits[stratum_of(x, box.dims[d].lower, box.dims[d].upper, n)];
    }
    for (std::size_t k = 0; k < n; ++k) ASSERT_EQ(hits[k], 1) << "dimension " << d << " stratum " << k;
  }
}

std::vector<Run> small_runs(std::size_t n, std::uint64_t seed) {
  const auto ps = latin_hypercube(ParameterBox::defaults(), n, seed);
  const auto rs = simulate_batch(ps, PlantConfig{});
  Ensemble e(ParameterBox::defaults(), seed, "t");
  e.append_runs(ps, rs, Provenance::initial, 0);
  return e.runs();
}

// Independent quantile oracle: sort, then interpolate at p (n - 1).
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST(ParameterBox, DefaultsAndValidation) {
  const auto box = ParameterBox::defaults();
  EXPECT_NO_THROW(box.validate());
  EXPECT_EQ(box.dims[0].name, "n_pump");
  EXPECT_DOUBLE_EQ(box.dims[2].lower, 293.15);
  EXPECT_DOUBLE_EQ(box.dims[2].upper, 323.15);
  EXPECT_DOUBLE_EQ(box.dims[4].lower, 0.5e-6);
  auto bad = box;
  bad.dims[1].upper = bad.dims[1].lower;
  EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::InvalidBox);
  EXPECT_EQ(kind_of([&] { latin_hypercube(bad, 10, 1); }), ErrorKind::InvalidBox);
}

TEST(LatinHypercube, StratifiedAcrossSizesAndSeeds) {
  const auto box = ParameterBox::defaults();
  for (std::size_t n : {1u, 2u, 7u, 100u, 1000u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SCOPED_TRACE("n=" + std::to_string(n) + " seed=" + std::to_string(seed));
      expect_stratified(latin_hypercube(box, n, seed), box);
    }
  }
}

TEST(LatinHypercube, RandomBoxesStayStratified) {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    ParameterBox box = ParameterBox::defaults();
    for (auto& d : box.dims) {
      const double a = rng.uniform(1e-7, 1e4);
      d.lower = a;
      d.upper = a * (1.0 + rng.uniform(1e-6, 3.0));
    }
    const auto n = static_cast<std::size_t>(1 + rng.below(300));
    expect_stratified(latin_hypercube(box, n, rng.next()), box);
  }
}

TEST(LatinHypercube, SeedDeterministicBytes) {
  const auto a = latin_hypercube(ParameterBox::defaults(), 5000, 7);
  const auto b = latin_hypercube(ParameterBox::defaults(), 5000, 7);
  const auto c = latin_hypercube(ParameterBox::defaults(), 5000, 8);
  ASSERT_EQ(a.size(), 5000u);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(ControlParams)), 0);
  EXPECT_NE(std::memcmp(a.data(), c.data(), a.size() * sizeof(ControlParams)), 0);
}

TEST(LatinHypercube, SingleSampleInsideBox) {
  const auto box = ParameterBox::defaults();
  const auto ps = latin_hypercube(box, 1, 3);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_TRUE(box.contains(ps[0]));
  EXPECT_EQ(kind_of([&] { latin_hypercube(box, 0, 3); }), ErrorKind::InvalidArgument);
}

TEST(RefineAround, WithinFractionAndCenterFirst) {
  const auto box = ParameterBox::defaults();
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto center = random_params(rng, box);
    const auto ps = refine_around(center, box, {20, 0.05, false}, rng.next());
    ASSERT_EQ(ps.size(), 20u);
    EXPECT_EQ(ps[0], center);
    for (const auto& p : ps) {
      EXPECT_TRUE(box.contains(p));
      const auto v = p.to_array();
      const auto c = center.to_array();
      for (std::size_t d = 0; d < v.size(); ++d) EXPECT_LE(std::abs(v[d] / c[d] - 1.0), 0.05 + 1e-12);
    }
  }
}

TEST(RefineAround, StratifiedInsideJitterBox) {
  const auto center = ParameterBox::defaults().clip({4000, 0.5, 308, 0.2, 2e-6});
  ParameterBox jitter = ParameterBox::defaults();
  for (std::size_t d = 0; d < 5; ++d) {
    jitter.dims[d].lower = center.to_array()[d] * 0.96;
    jitter.dims[d].upper = center.to_array()[d] * 1.04;
  }
  auto ps = refine_around(center, ParameterBox::defaults(), {41, 0.04, false}, 5);
  ps.erase(ps.begin());
  expect_stratified(ps, jitter);
}

TEST(RefineAround, ClippingAndEscape) {
  const auto box = ParameterBox::defaults();
  const ControlParams corner{800.0, 0.1, 293.15, 0.05, 0.5e-6};
  for (const auto& p : refine_around(corner, box, {20, 0.5, false}, 9)) EXPECT_TRUE(box.contains(p));
  const auto free = refine_around(corner, box, {20, 0.5, true}, 9);
  EXPECT_TRUE(std::any_of(free.begin(), free.end(), [&](const ControlParams& p) { return !box.contains(p); }));
}

TEST(RefineAround, DeterministicAndErrors) {
  const auto box = ParameterBox::defaults();
  const ControlParams c{3000, 0.5, 300, 0.2, 2e-6};
  EXPECT_EQ(refine_around(c, box, {}, 4), refine_around(c, box, {}, 4));
  auto bad = c;
  bad.mf_air_cond = 0.0;
  EXPECT_EQ(kind_of([&] { refine_around(bad, box, {}, 4); }), ErrorKind::InvalidCenter);
  EXPECT_EQ(kind_of([&] { refine_around(c, box, {20, 0.6, false}, 4); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { refine_around(c, box, {0, 0.05, false}, 4); }), ErrorKind::InvalidArgument);
}

TEST(Ensemble, AppendIsMonotone) {
  Ensemble e(ParameterBox::defaults(), 1, "t");
  const auto ps = latin_hypercube(e.box(), 10, 1);
  const auto rs = simulate_batch(ps, PlantConfig{});
  const auto ids = e.append_runs(ps, rs, Provenance::initial, 0);
  EXPECT_EQ(ids.front(), 1u);
  EXPECT_EQ(ids.back(), 10u);
  const auto before = e.runs();

  const auto ids2 = e.append_runs(std::span(ps).first(3), std::span(rs).first(3), Provenance::refinement, 2);
  EXPECT_EQ(e.size(), 13u);
  EXPECT_EQ(ids2, (std::vector<std::uint64_t>{11, 12, 13}));
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(e.runs()[i].params, before[i].params);
  EXPECT_EQ(e.find(12)->iteration, 2);
  EXPECT_EQ(e.find(12)->provenance, Provenance::refinement);
  EXPECT_EQ(e.find(99), nullptr);

  EXPECT_TRUE(e.append_runs({}, {}, Provenance::refinement, 3).empty());
  EXPECT_EQ(e.size(), 13u);
  EXPECT_EQ(kind_of([&] { e.append_runs(ps, std::span(rs).first(2), Provenance::refinement, 3); }),
            ErrorKind::LengthMismatch);
  EXPECT_EQ(e.size(), 13u);
}

TEST(Ensemble, InitialRunsMustLieInBox) {
  Ensemble e(ParameterBox::defaults(), 1, "t");
  std::vector<ControlParams> ps = {{100.0, 0.5, 300, 0.2, 2e-6}};
  std::vector<CycleResult> rs(1);
  EXPECT_THROW(e.append_runs(ps, rs, Provenance::initial, 0), Error);
  EXPECT_EQ(e.size(), 0u);
}

TEST(Statistics, HandComputable) {
  const auto s = summarize({5, 3, 1, 4, 2});
  EXPECT_EQ(s.count, 5u);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.q1, 2);
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.q3, 4);
  EXPECT_EQ(s.max, 5);
  EXPECT_EQ(s.mean, 3);
  const auto one = summarize({2.5});
  EXPECT_EQ(one.min, 2.5);
  EXPECT_EQ(one.max, 2.5);
  EXPECT_EQ(one.median, 2.5);
  EXPECT_EQ(one.mean, 2.5);
  EXPECT_EQ(kind_of([] { summarize({}); }), ErrorKind::EmptySelection);
}

TEST(Statistics, MatchesBruteForceAndIgnoresOrder) {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(1 + rng.below(1000));
    for (auto& x : v) x = rng.uniform(-5, 5);
    const auto s = summarize(v);
    EXPECT_NEAR(s.q1, quantile(v, 0.25), 1e-12);
    EXPECT_NEAR(s.median, quantile(v, 0.5), 1e-12);
    EXPECT_NEAR(s.q3, quantile(v, 0.75), 1e-12);
    EXPECT_EQ(s.min, *std::min_element(v.begin(), v.end()));
    EXPECT_EQ(s.max, *std::max_element(v.begin(), v.end()));
    rng.shuffle(std::span(v));
    const auto t = summarize(v);
    EXPECT_EQ(s.median, t.median);
    EXPECT_EQ(s.mean, t.mean);
  }
}

TEST(Statistics, IterationSelection) {
  Ensemble e(ParameterBox::defaults(), 1, "t");
  const auto ps = latin_hypercube(e.box(), 200, 2);
  const auto rs = simulate_batch(ps, PlantConfig{});
  e.append_runs(ps, rs, Provenance::initial, 0);
  const auto stats = iteration_statistics(e, std::nullopt);
  ASSERT_EQ(stats.size(), kAllOutputs.size());
  std::vector<double> cops;
  for (const auto& r : e.runs()) {
    if (r.result.valid) cops.push_back(r.result.cop);
  }
  EXPECT_EQ(stats[0].first, Output::cop);
  EXPECT_EQ(stats[0].second.count, cops.size());
  EXPECT_NEAR(stats[0].second.median, quantile(cops, 0.5), 1e-12);
  EXPECT_EQ(kind_of([&] { iteration_statistics(e, 4); }), ErrorKind::EmptySelection);
}

TEST(ColorLevels, SevenLevelScheme) {
  EXPECT_TRUE(assign_color_levels(0).empty());
  EXPECT_EQ(assign_color_levels(1), (std::vector<int>{6}));
  EXPECT_EQ(assign_color_levels(2), (std::vector<int>{0, 6}));
  EXPECT_EQ(assign_color_levels(3), (std::vector<int>{0, 3, 6}));
  EXPECT_EQ(assign_color_levels(5), (std::vector<int>{0, 1, 3, 4, 6}));
  EXPECT_EQ(assign_color_levels(7), (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(assign_color_levels(9), (std::vector<int>{0, 0, 0, 1, 2, 3, 4, 5, 6}));
  for (std::size_t k = 1; k <= 7; ++k) {
    const auto lv = assign_color_levels(k);
    EXPECT_EQ(lv.back(), 6);
    EXPECT_TRUE(std::is_sorted(lv.begin(), lv.end()));
    EXPECT_EQ(std::set<int>(lv.begin(), lv.end()).size(), k);
  }
}

TEST(Csv, ExportShapeAndRoundTrip) {
  auto runs = small_runs(60, 5);
  runs[3].provenance = Provenance::predicted;
  runs[3].iteration = 1;
  runs[4].provenance = Provenance::refinement;
  runs[4].iteration = 1;
  const auto doc = export_csv(std::span(runs).first(3));
  EXPECT_EQ(std::count(doc.begin(), doc.end(), '\n'), 4);

  const auto back = import_csv(export_csv(runs));
  ASSERT_EQ(back.size(), runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& a = runs[i];
    const auto& b = back[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.provenance, b.provenance);
    EXPECT_EQ(a.iteration, b.iteration);
    EXPECT_EQ(a.result.valid, b.result.valid);
    EXPECT_EQ(a.result.reason, b.result.reason);
    EXPECT_EQ(a.params, b.params);
    if (!a.result.valid) continue;
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_LE(rel(b.result.points[k].pressure, a.result.points[k].pressure), 1e-12);
      EXPECT_LE(rel(b.result.points[k].enthalpy, a.result.points[k].enthalpy), 1e-12);
      EXPECT_LE(rel(b.result.points[k].temperature, a.result.points[k].temperature), 1e-12);
    }
    EXPECT_LE(rel(b.result.cop, a.result.cop), 1e-12);
    EXPECT_LE(rel(b.result.m_dot, a.result.m_dot), 1e-12);
  }
  EXPECT_EQ(export_csv(back), export_csv(runs));
}

TEST(Csv, SchemaErrorsNameTheColumn) {
  const auto runs = small_runs(3, 6);
  auto doc = export_csv(runs);
  auto bad = doc;
  bad.replace(bad.find("n_pump"), 6, "n_pimp");
  try {
    import_csv(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("n_pump"), std::string::npos) << e.what();
  }
  auto bad_value = doc;
  const auto row = bad_value.find('\n') + 1;
  bad_value.replace(bad_value.find(',', row) + 1, 0, "x");
  EXPECT_EQ(kind_of([&] { import_csv(bad_value); }), ErrorKind::SchemaMismatch);
}

TEST(Csv, ExportSelectionByIds) {
  Ensemble e(ParameterBox::defaults(), 1, "t");
  const auto runs = small_runs(5, 7);
  e.restore(runs);
  const std::vector<std::uint64_t> ids = {2, 4};
  const auto back = import_csv(export_csv(e, ids));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].id, 4u);
  const std::vector<std::uint64_t> missing = {77};
  EXPECT_EQ(kind_of([&] { export_csv(e, missing); }), ErrorKind::NotFound);
}

TEST(Json, RecordsRoundTrip) {
  IterationRecord r;
  r.id = 3;
  r.name = "third";
  r.spec = {5e5, 12e5, 12, 12, 0.7};
  r.predicted_params = {1000, 0.2, 300, 0.3, 1.4e-6};
  r.predicted_assessment = {5000, 6500, 1500, 3.3};
  r.center_run_id = 42;
  r.refinement_run_ids = {43, 44};
  r.visible = false;
  r.predicted_color = 2;
  r.simulated_color = 2;
  r.notes = "n";
  const auto back = iteration_from_json(to_json(r));
  EXPECT_EQ(to_json(back), to_json(r));

  Finding f{"f", {1, 2, 3}, true, 4, "note"};
  EXPECT_EQ(to_json(finding_from_json(to_json(f))), to_json(f));

  PlantConfig c;
  c.ua_cond = 1234.5;
  EXPECT_EQ(plant_from_json(to_json(c)), c);
  EXPECT_EQ(plant_from_json(nlohmann::json::object()), PlantConfig{});
  EXPECT_THROW(plant_from_json({{"ua_cnd", 1.0}}), Error);
  EXPECT_EQ(box_from_json(to_json(ParameterBox::defaults())), ParameterBox::defaults());
}

TEST(Calibration, ErrorsAndFrozenBaseline) {
  const auto r = simulate(default_baseline_params(), PlantConfig{});
  const auto err = calibration_errors(r, {});
  for (double e : err) EXPECT_LT(e, 1e-3);
  CycleResult invalid;
  for (double e : calibration_errors(invalid, {})) EXPECT_TRUE(std::isinf(e));
}

TEST(Calibration, SearchReachesTarget) {
  CalibrationOptions o;
  o.grid_levels = 4;
  o.starts = 3;
  const auto r = calibrate(PlantConfig{}, ParameterBox::defaults(), {}, o);
  EXPECT_TRUE(r.within_tolerance);
  EXPECT_LT(r.max_relative_error, 0.10);
  EXPECT_TRUE(ParameterBox::defaults().contains(r.params));
  EXPECT_LE(r.evaluations, o.max_evaluations);
}
