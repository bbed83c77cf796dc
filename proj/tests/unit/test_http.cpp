#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "idoe/calibration.hpp"
#include "idoe/error.hpp"
#include "idoe/http_api.hpp"
#include "idoe/workbench.hpp"

// After the project headers: resolv.h, pulled in here, defines _res, which
// collides with Eigen parameter names.
#include <httplib.h>

using namespace idoe;
using nlohmann::json;

namespace {

json small_session() {
  return {{"name", "http"},
          {"initial_runs", 400},
          {"seed", 3},
          {"train", {{"hidden", 12}, {"epochs", 30}, {"batch_size", 32}, {"online_epochs", 5}}},
          {"baseline", "default"}};
}

const json kSpec = {{"p_low", 2.5}, {"p_high", 12.0}, {"subcooling", 7.0}, {"superheat", 8.0}};

json body(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST(HttpStatus, ErrorKindMapping) {
  EXPECT_EQ(http_status(ErrorKind::NotFound), 404);
  EXPECT_EQ(http_status(ErrorKind::JobAlreadyRunning), 409);
  EXPECT_EQ(http_status(ErrorKind::NotTrained), 409);
  EXPECT_EQ(http_status(ErrorKind::InfeasibleSpec), 422);
  EXPECT_EQ(http_status(ErrorKind::DatasetTooSmall), 422);
  EXPECT_EQ(http_status(ErrorKind::EmptySelection), 422);
  EXPECT_EQ(http_status(ErrorKind::Io), 500);
  EXPECT_EQ(http_status(ErrorKind::SchemaMismatch), 400);
  EXPECT_EQ(http_status(ErrorKind::InvalidArgument), 400);
}

class HttpTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    wb_ = new Workbench();
    server_ = new HttpServer(*wb_);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    server_->start();
    auto c = client();
    const auto r = c.Post("/sessions", small_session().dump(), "application/json");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 201) << r->body;
    sid_ = body(r)["id"].get<std::string>();
  }
  static void TearDownTestSuite() {
    server_->stop();
    delete server_;
    delete wb_;
  }
  static httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }
  static int propose() {
    auto c = client();
    const auto r = c.Post("/sessions/" + sid_ + "/propose", kSpec.dump(), "application/json");
    EXPECT_EQ(r->status, 201) << r->body;
    return body(r)["iteration"]["id"].get<int>();
  }
  static json wait_job(std::uint64_t id) {
    auto c = client();
    for (int i = 0; i < 2400; ++i) {
      const auto j = body(c.Get("/jobs/" + std::to_string(id)));
      if (j["status"] == "done" || j["status"] == "failed") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    ADD_FAILURE() << "job " << id << " did not finish";
    return {};
  }

  static Workbench* wb_;
  static HttpServer* server_;
  static int port_;
  static std::string sid_;
};
Workbench* HttpTest::wb_ = nullptr;
HttpServer* HttpTest::server_ = nullptr;
int HttpTest::port_ = 0;
std::string HttpTest::sid_;

TEST_F(HttpTest, SessionSummaryAndList) {
  auto c = client();
  const auto list = body(c.Get("/sessions"));
  EXPECT_NE(std::find(list["sessions"].begin(), list["sessions"].end(), sid_), list["sessions"].end());
  const auto r = c.Get("/sessions/" + sid_);
  ASSERT_EQ(r->status, 200);
  const auto s = body(r);
  EXPECT_EQ(s["runs"], 400);
  EXPECT_EQ(s["name"], "http");
  EXPECT_TRUE(s["model"]["trained"].get<bool>());
  EXPECT_NEAR(s["baseline"]["params"]["t_air_cabin"].get<double>(),
              default_baseline_params().t_air_cabin - 273.15, 1e-9);
  EXPECT_EQ(s["box"]["dimensions"].size(), 5u);

  const auto missing = c.Get("/sessions/zzz");
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(body(missing)["error"], "NotFound");
  EXPECT_EQ(c.Get("/no/such/route")->status, 404);
}

TEST_F(HttpTest, CreateSessionErrors) {
  auto c = client();
  auto r = c.Post("/sessions", "{oops", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(body(r)["error"], "SchemaMismatch");
  auto doc = small_session();
  doc["initial_runs"] = 20;
  r = c.Post("/sessions", doc.dump(), "application/json");
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(body(r)["error"], "DatasetTooSmall");
}

TEST_F(HttpTest, DiagramPayload) {
  auto c = client();
  const auto r = c.Get("/sessions/" + sid_ + "/diagram");
  ASSERT_EQ(r->status, 200);
  const auto d = body(r);
  ASSERT_EQ(d["hulls"].size(), 4u);
  for (const auto& h : d["hulls"]) EXPECT_GE(h.size(), 3u);
  ASSERT_EQ(d["reference"].size(), 4u);
  EXPECT_NEAR(d["reference"][0]["p"].get<double>(), 2.5, 0.03);
  EXPECT_FALSE(d["lines"].empty());
}

TEST_F(HttpTest, RunsFilters) {
  auto c = client();
  auto r = c.Get("/sessions/" + sid_ + "/runs?provenance=initial&limit=5&offset=2");
  ASSERT_EQ(r->status, 200);
  auto j = body(r);
  EXPECT_GE(j["total"].get<int>(), 398);
  ASSERT_EQ(j["runs"].size(), 5u);
  EXPECT_EQ(j["runs"][0]["id"], 3);
  EXPECT_EQ(j["runs"][0]["provenance"], "initial");

  j = body(c.Get("/sessions/" + sid_ + "/runs?valid=false&limit=3"));
  for (const auto& run : j["runs"]) EXPECT_FALSE(run["valid"].get<bool>());

  j = body(c.Get("/sessions/" + sid_ + "/runs?ids=4,7"));
  ASSERT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["runs"][1]["id"], 7);

  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/runs?ids=999999")->status, 404);
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/runs?valid=maybe")->status, 400);
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/runs?provenance=other")->status, 400);
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/runs?limit=-1")->status, 400);
}

TEST_F(HttpTest, ProposeRefineAndStatistics) {
  auto c = client();
  auto r = c.Post("/sessions/" + sid_ + "/propose", kSpec.dump(), "application/json");
  ASSERT_EQ(r->status, 201) << r->body;
  const auto p = body(r);
  const int k = p["iteration"]["id"].get<int>();
  EXPECT_EQ(p["inside_hull"].size(), 4u);
  EXPECT_NEAR(p["geometry"]["points"][0]["p"].get<double>(), 2.5, 1e-12);
  EXPECT_TRUE(p["center"].contains("cop"));

  r = c.Post("/sessions/" + sid_ + "/refine", json{{"iteration", k}, {"runs", 8}}.dump(), "application/json");
  ASSERT_EQ(r->status, 202) << r->body;
  const auto job = wait_job(body(r)["id"].get<std::uint64_t>());
  EXPECT_EQ(job["status"], "done");
  EXPECT_EQ(job["run_ids"].size(), 8u);

  const auto runs = body(c.Get("/sessions/" + sid_ + "/runs?provenance=refinement&iteration=" + std::to_string(k)));
  EXPECT_EQ(runs["total"], 8);

  r = c.Get("/sessions/" + sid_ + "/statistics?iteration=" + std::to_string(k));
  ASSERT_EQ(r->status, 200) << r->body;
  const auto st = body(r);
  EXPECT_EQ(st["iteration"], k);
  EXPECT_FALSE(st["outputs"].empty());
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/statistics")->status, 200);
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/statistics?iteration=999")->status, 404);
}

TEST_F(HttpTest, ProposeAndRefineErrors) {
  auto c = client();
  auto bad = kSpec;
  bad["p_high"] = 2.0;
  auto r = c.Post("/sessions/" + sid_ + "/propose", bad.dump(), "application/json");
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(body(r)["error"], "InfeasibleSpec");
  r = c.Post("/sessions/" + sid_ + "/propose", json{{"p_low", 2.5}}.dump(), "application/json");
  EXPECT_EQ(r->status, 400);

  const int k = propose();
  r = c.Post("/sessions/" + sid_ + "/refine", json{{"runs", 3}}.dump(), "application/json");
  EXPECT_EQ(r->status, 400);
  r = c.Post("/sessions/" + sid_ + "/refine", json{{"iteration", 999}}.dump(), "application/json");
  EXPECT_EQ(r->status, 404);
  r = c.Post("/sessions/" + sid_ + "/refine", json{{"iteration", k}, {"fraction", 0.9}}.dump(), "application/json");
  EXPECT_EQ(r->status, 400);
  r = c.Post("/sessions/" + sid_ + "/refine", json{{"iteration", k}, {"runs", -2}}.dump(), "application/json");
  EXPECT_EQ(r->status, 400);

  r = c.Post("/sessions/" + sid_ + "/refine", json{{"iteration", k}, {"runs", 2000}}.dump(), "application/json");
  ASSERT_EQ(r->status, 202);
  const auto first = body(r)["id"].get<std::uint64_t>();
  r = c.Post("/sessions/" + sid_ + "/refine", json{{"iteration", k}}.dump(), "application/json");
  EXPECT_EQ(r->status, 409);
  EXPECT_EQ(body(r)["error"], "JobAlreadyRunning");
  EXPECT_EQ(wait_job(first)["status"], "done");
  EXPECT_EQ(c.Get("/jobs/424242")->status, 404);
}

TEST_F(HttpTest, FindingsAndExport) {
  auto c = client();
  auto r = c.Post("/sessions/" + sid_ + "/findings",
                  json{{"name", "odd"}, {"case_ids", {2, 3}}, {"color", 1}, {"note", "n"}}.dump(), "application/json");
  ASSERT_EQ(r->status, 201) << r->body;
  EXPECT_EQ(body(r)["case_ids"].size(), 2u);
  r = c.Post("/sessions/" + sid_ + "/findings", json{{"name", "bad"}, {"case_ids", {99999}}}.dump(), "application/json");
  EXPECT_EQ(r->status, 404);

  r = c.Get("/sessions/" + sid_ + "/export.csv?finding=odd");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "text/csv");
  const auto rows = import_csv(r->body);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].id, 2u);

  r = c.Get("/sessions/" + sid_ + "/export.csv?ids=5");
  EXPECT_EQ(import_csv(r->body).size(), 1u);
  r = c.Get("/sessions/" + sid_ + "/export.csv");
  EXPECT_GE(import_csv(r->body).size(), 400u);
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/export.csv?finding=none")->status, 404);
  EXPECT_EQ(c.Get("/sessions/" + sid_ + "/export.csv?iteration=999")->status, 404);

  const int k = propose();
  r = c.Get("/sessions/" + sid_ + "/export.csv?iteration=" + std::to_string(k));
  EXPECT_EQ(import_csv(r->body).size(), 1u);
}

TEST_F(HttpTest, PatchIteration) {
  auto c = client();
  const int k = propose();
  const std::string path = "/sessions/" + sid_ + "/iterations/" + std::to_string(k);
  auto r = c.Patch(path, json{{"name", "tuned"}, {"visible", false}, {"notes", "x"}}.dump(), "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(body(r)["name"], "tuned");
  EXPECT_FALSE(body(r)["visible"].get<bool>());
  EXPECT_EQ(c.Patch(path, json{{"name", 5}}.dump(), "application/json")->status, 400);
  EXPECT_EQ(c.Patch("/sessions/" + sid_ + "/iterations/999", "{}", "application/json")->status, 404);
  EXPECT_EQ(c.Patch(path, json{{"visible", true}}.dump(), "application/json")->status, 200);
}

TEST(HttpServerLifecycle, StartRequiresBind) {
  Workbench wb;
  HttpServer s(wb);
  EXPECT_THROW(s.start(), Error);
  EXPECT_GT(s.bind("127.0.0.1", 0), 0);
  s.start();
  s.stop();
}
