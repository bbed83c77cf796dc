#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "idoe/doe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(IDOE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

json run_json(const std::string& args) {
  const auto r = run(args);
  EXPECT_EQ(r.status, 0) << args;
  return json::parse(r.out);
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("idoe-cli-" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(root_ / "options.json")
        << json{{"initial_runs", 400}, {"seed", 3}, {"baseline", "default"},
                {"train", {{"hidden", 12}, {"epochs", 30}, {"batch_size", 32}, {"online_epochs", 5}}}}
               .dump();
    const auto r = run("session create --dir " + (root_ / "s").string() + " --options " +
                       (root_ / "options.json").string());
    ASSERT_EQ(r.status, 0) << r.out;
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }
  static std::string dir() { return (root_ / "s").string(); }
  static fs::path root_;
};
fs::path CliTest::root_;

}  // namespace

TEST(Cli, SimulateBaseline) {
  const auto j = run_json("simulate --n-pump 2200 --mf-air-cond 0.45 --t-air-cabin 30 --mf-air-evap 0.12 "
                          "--a-eff-valve 2.2e-6");
  EXPECT_TRUE(j.contains("cop"));
  EXPECT_TRUE(j["points"].is_array());
  EXPECT_EQ(j["points"].size(), 4u);
}

TEST(Cli, UsageErrorsExitNonzero) {
  EXPECT_NE(run("simulate --n-pump 2200").status, 0);
  EXPECT_NE(run("no-such-verb").status, 0);
  EXPECT_NE(run("session show --dir /nonexistent/idoe").status, 0);
}

TEST(Cli, EnsembleCsvAndStats) {
  const auto path = fs::temp_directory_path() / ("idoe-cli-ens-" + std::to_string(::getpid()) + ".csv");
  const auto r = run("-o " + path.string() + " ensemble new --runs 30 --seed 4");
  ASSERT_EQ(r.status, 0);
  std::ifstream in(path);
  const std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto runs = idoe::import_csv(csv);
  ASSERT_EQ(runs.size(), 30u);
  for (const auto& run : runs) EXPECT_TRUE(idoe::ParameterBox::defaults().contains(run.params));
  EXPECT_EQ(run("ensemble new --runs 30 --seed 4").out, csv);

  const auto stats = run_json("stats --csv " + path.string());
  EXPECT_TRUE(stats.contains("outputs"));
  fs::remove(path);
}

TEST(Cli, DiagramJson) {
  const auto d = run_json("diagram");
  EXPECT_FALSE(d["lines"].empty());
}

TEST_F(CliTest, SessionLoop) {
  const auto shown = run_json("session show --dir " + dir());
  EXPECT_EQ(shown["runs"], 400);

  const auto p = run_json("propose --session " + dir() + " --p-low 2.5 --p-high 12 --subcooling 7 --superheat 8");
  const int k = p["iteration"]["id"].get<int>();
  EXPECT_EQ(p["inside_hull"].size(), 4u);

  const auto job = run_json("refine --session " + dir() + " --iteration " + std::to_string(k) + " --runs 5");
  EXPECT_EQ(job["status"], "done");
  EXPECT_EQ(job["run_ids"].size(), 5u);

  const auto runs = run_json("runs --session " + dir() + " --provenance refinement --iteration " + std::to_string(k));
  EXPECT_EQ(runs["total"], 5);

  const auto f = run_json("finding add --session " + dir() + " --name picks --ids 1,2 --color 2");
  EXPECT_EQ(f["case_ids"].size(), 2u);
  const auto csv = run("export --session " + dir() + " --finding picks");
  ASSERT_EQ(csv.status, 0);
  EXPECT_EQ(idoe::import_csv(csv.out).size(), 2u);

  const auto rec = run_json("iteration patch --session " + dir() + " --iteration " + std::to_string(k) +
                            " --name first --visible false");
  EXPECT_EQ(rec["name"], "first");
  const auto again = run_json("session show --dir " + dir());
  EXPECT_EQ(again["iterations"][static_cast<std::size_t>(k - 1)]["name"], "first");
  EXPECT_EQ(again["findings"].size(), 1u);

  const auto st = run_json("stats --session " + dir() + " --iteration " + std::to_string(k));
  EXPECT_FALSE(st["outputs"].empty());
  EXPECT_NE(run("refine --session " + dir() + " --iteration 99").status, 0);
}
