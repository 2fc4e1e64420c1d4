#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace dergame;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dergame_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string tiny_file(const fs::path& dir) {
  const fs::path p = dir / "tiny.yaml";
  std::ofstream(p) << fixture::tiny_yaml();
  return p.string();
}

}  // namespace

TEST(Cli, RunWritesResultAndSummary) {
  TempDir t("run");
  cli::RunOptions o;
  o.base = tiny_file(t.path);
  o.ids = {"case1_nem_nocarbon", "case1_vs_nocarbon"};
  o.out = (t.path / "out").string();
  o.jobs = 2;
  std::ostringstream log, err;
  ASSERT_EQ(cli::cmd_run(o, log, err), cli::kOk) << err.str();
  const auto summary = slurp(t.path / "out" / "summary.csv");
  for (const auto& id : o.ids) {
    auto r = nlohmann::json::parse(slurp(t.path / "out" / (id + ".json")));
    EXPECT_EQ(r["schema_version"], cli::kSchemaVersion);
    EXPECT_EQ(r["status"], "ok");
    EXPECT_NE(summary.find(cli::summary_row(r)), std::string::npos) << id;
  }

  // Reports are byte-identical across re-runs.
  ASSERT_EQ(cli::cmd_report(o.out, (t.path / "r1").string(), log, err), cli::kOk) << err.str();
  ASSERT_EQ(cli::cmd_report(o.out, (t.path / "r2").string(), log, err), cli::kOk) << err.str();
  for (const char* f : {"capacity_welfare.csv", "zones.csv", "beliefs.csv", "welfare_deltas.csv"})
    EXPECT_EQ(slurp(t.path / "r1" / f), slurp(t.path / "r2" / f)) << f;
  EXPECT_NE(slurp(t.path / "r1" / "zones.csv").find("\nc,"), std::string::npos);

  // A corrupt file and a missing one are each named.
  std::ofstream(fs::path(o.out) / "case1_vs_nocarbon.json") << "{ not json";
  std::ostringstream err2;
  EXPECT_EQ(cli::cmd_report(o.out, (t.path / "r3").string(), log, err2), cli::kPartial);
  EXPECT_NE(err2.str().find("case1_vs_nocarbon.json: corrupt"), std::string::npos) << err2.str();
  fs::remove(fs::path(o.out) / "case1_vs_nocarbon.json");
  std::ostringstream err3;
  EXPECT_EQ(cli::cmd_report(o.out, (t.path / "r3").string(), log, err3), cli::kPartial);
  EXPECT_NE(err3.str().find("case1_vs_nocarbon.json: missing"), std::string::npos) << err3.str();
}

TEST(Cli, UnwritableOutputIsAnErrorWithoutWrites) {
  TempDir t("blocked");
  const fs::path blocker = t.path / "file";
  std::ofstream(blocker) << "x";
  cli::RunOptions o;
  o.base = tiny_file(t.path);
  o.ids = {"case1_nem_nocarbon"};
  o.out = (blocker / "out").string();
  std::ostringstream log, err;
  EXPECT_EQ(cli::cmd_run(o, log, err), cli::kInvalid);
  EXPECT_FALSE(fs::exists(blocker / "out"));
}

TEST(Cli, InvalidInputs) {
  TempDir t("invalid");
  std::ostringstream log, err;
  EXPECT_EQ(cli::cmd_report(t.path.string(), (t.path / "r").string(), log, err), cli::kInvalid);
  EXPECT_NE(err.str().find("0 inputs"), std::string::npos) << err.str();
  cli::RunOptions o;
  o.base = tiny_file(t.path);
  o.ids = {"case9_nem_nocarbon"};
  o.out = (t.path / "o").string();
  EXPECT_EQ(cli::cmd_run(o, log, err), cli::kInvalid);
  EXPECT_EQ(cli::cmd_validate(o.base, log, err), cli::kOk);
  std::ofstream(t.path / "bad.yaml") << "network: [";
  EXPECT_EQ(cli::cmd_validate((t.path / "bad.yaml").string(), log, err), cli::kInvalid);
}

TEST(Cli, OutputRootFromEnvironment) {
  setenv(cli::kOutEnv, "/tmp/dergame_env_root", 1);
  EXPECT_EQ(cli::default_out(), "/tmp/dergame_env_root");
  unsetenv(cli::kOutEnv);
  EXPECT_EQ(cli::default_out(), "results");
}
