#include "hostcap/accept.hpp"
#include "hostcap/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <sys/wait.h>

using namespace hostcap;
using hostcap::testing::read_text;
using hostcap::testing::TempDir;
using hostcap::testing::write_text;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const TempDir& dir, const std::string& args) {
  const std::string err_path = (dir / "stderr.txt").string();
  const std::string cmd = std::string(HOSTCAP_CLI_PATH) + " " + args + " 2>" + err_path;
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text(err_path);
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    save_network(desk_network(), dir_ / "net.json");
    save_scenarios(synth_scenarios(3, ScenarioSpec{.count = 30}, 4), dir_ / "scen.csv", true);
    data_ = "--network " + (dir_ / "net.json").string() + " --scenarios " + (dir_ / "scen.csv").string();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  CliRun run(const std::string& args) const { return run_cli(dir_, args); }

  TempDir dir_{"cli"};
  std::string data_;
};

}  // namespace

TEST_F(Cli, CvarOfSmallColumn) {
  write_text(dir_ / "vals.csv", "value\n1\n2\n3\n4\n");
  const CliRun r = run("cvar --input " + path("vals.csv") + " --delta 0");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "2.5\n");

  const CliRun j = run("--json cvar --input " + path("vals.csv") + " --delta 0.5");
  EXPECT_EQ(j.code, 0);
  const json doc = json::parse(j.out);
  EXPECT_EQ(doc["cvar"].get<double>(), 3.5);
  EXPECT_EQ(doc["count"].get<int>(), 4);
}

TEST_F(Cli, CvarSecondColumnAndErrors) {
  write_text(dir_ / "two.csv", "1,10\n2,20\n");
  EXPECT_EQ(run("cvar --input " + path("two.csv") + " --column 2 --delta 0.5").out, "20\n");
  EXPECT_EQ(run("cvar --input " + path("two.csv") + " --delta 1.0").code, 2);
  EXPECT_EQ(run("cvar --input " + path("two.csv") + " --column 3").code, 5);
  write_text(dir_ / "bad.csv", "1\nx\n");
  EXPECT_EQ(run("cvar --input " + path("bad.csv")).code, 5);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("maximize " + data_ + " --nu 1.0").code, 2);
  EXPECT_EQ(run("maximize " + data_ + " --gamma -0.5").code, 2);
  EXPECT_EQ(run("maximize --network " + path("missing.json") + " --scenarios " + path("scen.csv")).code, 2);
}

TEST_F(Cli, JsonErrorsOnStderr) {
  const CliRun r = run("--json maximize " + data_ + " --nu 1.5");
  EXPECT_EQ(r.code, 2);
  const json doc = json::parse(r.err);
  EXPECT_EQ(doc["error"], "BadDelta");
  EXPECT_TRUE(doc.contains("message"));
}

TEST_F(Cli, DataErrors) {
  write_text(dir_ / "broken.json", "{\"buses\": 2}");
  EXPECT_EQ(run("maximize --network " + path("broken.json") + " --scenarios " + path("scen.csv")).code, 5);
  write_text(dir_ / "narrow.csv", "0.5,0.1,0.03\n");
  EXPECT_EQ(run("maximize --network " + path("net.json") + " --scenarios " + path("narrow.csv")).code, 5);
}

TEST_F(Cli, VersionAndHelp) {
  const CliRun v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("0.1.0"), std::string::npos);
  const CliRun h = run("test --help");
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("--shadow-check"), std::string::npos);
}

TEST_F(Cli, MaximizeWritesResultAndManifest) {
  const CliRun r = run("maximize " + data_ + " --nu 0.8 --gamma 0.8 --out " + path("res.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("psi_star ", 0), 0u);
  const json res = json::parse(read_text(dir_ / "res.json"));
  EXPECT_EQ(res["nu"].get<double>(), 0.8);
  EXPECT_EQ(res["K"].get<int>(), 30);
  EXPECT_EQ(res["flow_states"].size(), 30u);

  const json man = json::parse(read_text(dir_ / "res.json.manifest.json"));
  EXPECT_EQ(man["subcommand"], "maximize");
  EXPECT_EQ(man["version"], "0.1.0");
  EXPECT_EQ(man["inputs"]["scenarios"]["digest"], res["scenario_digest"]);
  EXPECT_EQ(man["inputs"]["network"]["sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(man["risk"]["gamma"].get<double>(), 0.8);
  EXPECT_EQ(man["tolerances"]["feas_tol"].get<double>(), 1e-8);
  EXPECT_TRUE(man["timings"].contains("solve"));

  // Byte-stable output for identical inputs.
  ASSERT_EQ(run("maximize " + data_ + " --nu 0.8 --gamma 0.8 --out " + path("res2.json")).code, 0);
  EXPECT_EQ(read_text(dir_ / "res.json"), read_text(dir_ / "res2.json"));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  write_text(dir_ / "run.toml", "[maximize]\nnu = 0.5\ngamma = 0.6\n");
  ASSERT_EQ(run("--config " + path("run.toml") + " maximize " + data_ + " --out " + path("a.json")).code, 0);
  json res = json::parse(read_text(dir_ / "a.json"));
  EXPECT_EQ(res["nu"].get<double>(), 0.5);
  EXPECT_EQ(res["gamma"].get<double>(), 0.6);
  ASSERT_EQ(run("--config " + path("run.toml") + " maximize " + data_ + " --nu 0.7 --out " + path("b.json")).code, 0);
  res = json::parse(read_text(dir_ / "b.json"));
  EXPECT_EQ(res["nu"].get<double>(), 0.7);
  EXPECT_EQ(res["gamma"].get<double>(), 0.6);
}

TEST_F(Cli, SubsampleAndStudy) {
  const CliRun r = run("--json maximize " + data_ + " --subsample 10 --seed 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["K"].get<int>(), 10);
  EXPECT_EQ(run("maximize " + data_ + " --subsample 31").code, 2);

  const CliRun s = run("maximize " + data_ + " --study 5,30 --trials 2 --seed 9");
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(s.out.rfind("size,trials,failures,mean,stddev\n5,2,0,", 0), 0u);
  EXPECT_NE(s.out.find("\n30,2,0,"), std::string::npos);
}

TEST_F(Cli, DumpProgram) {
  ASSERT_EQ(run("maximize " + data_ + " --dump-program " + path("prog.txt")).code, 0);
  EXPECT_EQ(read_text(dir_ / "prog.txt").rfind("conic-program 1\n", 0), 0u);
}

TEST_F(Cli, TestSubcommandAndKnowledgeBase) {
  const std::string kb = " --kb " + path("kb.json");
  const CliRun first = run("test " + data_ + " --nu 0.8 --gamma 0.8 --psi 0.5,0.5" + kb);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_NE(first.out.find("method FullSolve"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "kb.json.manifest.json"));

  // The same candidate again is answered from the stored hull.
  const CliRun again = run("--json test " + data_ + " --nu 0.8 --gamma 0.8 --psi 0.5,0.5" + kb);
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(json::parse(again.out)["method"], "InnerHull");

  // Outside the box: unacceptable without a solve.
  const CliRun outside = run("test " + data_ + " --nu 0.8 --gamma 0.8 --psi 9,0 --shadow-check" + kb);
  EXPECT_EQ(outside.code, 3);
  EXPECT_NE(outside.out.find("method OuterCut"), std::string::npos);

  // Other risk levels cannot reuse the base.
  EXPECT_EQ(run("test " + data_ + " --nu 0.7 --gamma 0.8 --psi 0.5,0.5" + kb).code, 5);

  const CliRun inspect = run("kb-inspect" + kb);
  ASSERT_EQ(inspect.code, 0) << inspect.err;
  EXPECT_NE(inspect.out.find("InnerHull acceptable 1"), std::string::npos);
}

TEST_F(Cli, CandidateFiles) {
  write_text(dir_ / "cands.txt", "# psi_2, psi_3\n0.1, 0.1\n0.2 0.2\n");
  const CliRun r = run("--json test " + data_ + " --psi " + path("cands.txt") + " --kb " + path("kb2.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).size(), 2u);
  write_text(dir_ / "cands.json", "[[0.1, 0.1], [9, 9]]");
  EXPECT_EQ(run("test " + data_ + " --psi " + path("cands.json") + " --kb " + path("kb2.json")).code, 3);
  EXPECT_EQ(run("test " + data_ + " --psi 0.1,0.1,0.1 --kb " + path("kb2.json")).code, 5);
}

TEST_F(Cli, ValidateResult) {
  ASSERT_EQ(run("maximize " + data_ + " --nu 0.8 --gamma 0.8 --out " + path("res.json")).code, 0);
  const CliRun v = run("validate --result " + path("res.json") + " " + data_ + " --out-csv " + path("viol.csv"));
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_NE(v.out.find("max_gap "), std::string::npos);
  const std::string csv = read_text(dir_ / "viol.csv");
  EXPECT_EQ(csv.rfind("constraint,index,violations,scenarios,fraction,bound,within\n", 0), 0u);

  save_scenarios(synth_scenarios(3, ScenarioSpec{.count = 30}, 5), dir_ / "other.csv", true);
  EXPECT_EQ(run("validate --result " + path("res.json") + " --network " + path("net.json") + " --scenarios " +
                path("other.csv"))
                .code,
            5);
}
