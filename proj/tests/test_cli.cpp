#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("sisnet_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary inside the test directory; stdout and stderr land in log_.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" SISNET_CLI "' " + args +
                            " > log.txt 2>&1";
    const int status = std::system(cmd.c_str());
    log_ = read("log.txt");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  void write(const fs::path& rel, const std::string& text) const {
    std::ofstream(dir_ / rel, std::ios::binary) << text;
  }

  std::map<std::string, std::string> snapshot(const fs::path& rel) const {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir_ / rel))
      if (e.is_regular_file()) files[fs::relative(e.path(), dir_).string()] = read(fs::relative(e.path(), dir_));
    return files;
  }

  // Runs twice into the same directory and requires identical bytes everywhere.
  void expect_rerun_identical(const std::string& args, const fs::path& out) {
    ASSERT_EQ(run(args), 0) << log_;
    const auto first = snapshot(out);
    ASSERT_TRUE(first.count((out / "manifest.toml").string()));
    fs::remove_all(dir_ / out);
    ASSERT_EQ(run(args), 0) << log_;
    EXPECT_EQ(snapshot(out), first);
  }

  void simulate_small() {
    ASSERT_EQ(run("simulate --agents 8 --steps 30 --alpha 0.05 --seed 4 --out sim"), 0) << log_;
  }

  fs::path dir_;
  std::string log_;
};

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

}  // namespace

TEST_F(Cli, SimulateRerunIdentical) {
  expect_rerun_identical("simulate --agents 10 --steps 40 --seed 9 --out sim", "sim");
  EXPECT_EQ(read("sim/contacts.csv").rfind("t,agent_a,agent_b\n", 0), 0u);
  EXPECT_EQ(read("sim/surveys.csv").rfind("t,agent,s1\n", 0), 0u);
  EXPECT_TRUE(contains(read("sim/manifest.toml"), "seed = 9\n"));
}

TEST_F(Cli, SeedIsRequired) {
  EXPECT_NE(run("simulate --agents 5 --steps 5 --out sim"), 0);
  EXPECT_TRUE(contains(log_, "--seed is required")) << log_;
  EXPECT_FALSE(fs::exists(dir_ / "sim" / "manifest.toml"));
  write("c.csv", "t,agent_a,agent_b\n1,1,2\n");
  write("s.csv", "t,agent,s1\n1,1,1\n");
  EXPECT_NE(run("infer --contacts c.csv --surveys s.csv --iterations 10 --burn-in 1 --out inf"), 0);
  EXPECT_TRUE(contains(log_, "--seed is required")) << log_;
}

TEST_F(Cli, ConfigSuppliesSeedAndFlagsOverride) {
  write("run.cfg", "# small run\nseed = 5\nagents = 6\nsteps=12\n\n");
  ASSERT_EQ(run("simulate --config run.cfg --agents 7 --out sim"), 0) << log_;
  const std::string manifest = read("sim/manifest.toml");
  EXPECT_TRUE(contains(manifest, "seed = 5\n"));
  EXPECT_TRUE(contains(manifest, "agents = \"7\""));
  EXPECT_TRUE(contains(manifest, "steps = \"12\""));
  // The seed from the config gives the same run as the explicit flag.
  ASSERT_EQ(run("simulate --agents 7 --steps 12 --seed 5 --out flag"), 0) << log_;
  EXPECT_EQ(read("flag/states.csv"), read("sim/states.csv"));

  write("bad.cfg", "seeds = 5\n");
  EXPECT_NE(run("simulate --config bad.cfg --out sim"), 0);
  write("bad.cfg", "no equals sign\n");
  EXPECT_NE(run("simulate --config bad.cfg --out sim"), 0);
  EXPECT_TRUE(contains(log_, "bad.cfg:1")) << log_;
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  ASSERT_EQ(run("simulate --agents 4 --steps 6 --seed 1", "SISNET_OUTPUT_DIR=envout"), 0) << log_;
  EXPECT_TRUE(fs::exists(dir_ / "envout" / "manifest.toml"));
  ASSERT_EQ(run("simulate --agents 4 --steps 6 --seed 1 --out flag", "SISNET_OUTPUT_DIR=envout"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "flag" / "states.csv"));
}

TEST_F(Cli, InferKeptSamplesAndRerun) {
  simulate_small();
  expect_rerun_identical(
      "infer --contacts sim/contacts.csv --surveys sim/surveys.csv --seed 2 --iterations 10000 "
      "--burn-in 1000 --out inf",
      "inf");
  EXPECT_TRUE(contains(read("inf/manifest.toml"), "kept_samples = \"9000\""));
  const std::string marginals = read("inf/marginals.csv");
  EXPECT_EQ(marginals.rfind("agent,1,2,", 0), 0u);
  ASSERT_EQ(run("infer --contacts sim/contacts.csv --surveys sim/surveys.csv --seed 2 "
                "--iterations 100 --burn-in 10 --thinning 3 --variant additive --out thin"),
            0)
      << log_;
  EXPECT_TRUE(contains(read("thin/manifest.toml"), "kept_samples = \"30\""));
  EXPECT_NE(run("infer --contacts sim/contacts.csv --surveys sim/surveys.csv --seed 2 "
                "--variant sir --out bad"),
            0);
}

TEST_F(Cli, BenchmarkRerunAndJobs) {
  const std::string base =
      "benchmark --series 3 --length 30 --agents 20 --training-length 60 --iterations 200 "
      "--burn-in 50 --alpha 0.05 --seed 3";
  expect_rerun_identical(base + " --jobs 1 --out one", "one");
  ASSERT_EQ(run(base + " --jobs 3 --out three"), 0) << log_;
  for (const std::string f : {"summary.csv", "roc_averaged.csv", "roc/series_000.csv",
                              "roc/series_002.csv"})
    EXPECT_EQ(read("one/" + f), read("three/" + f)) << f;
  EXPECT_TRUE(contains(read("one/summary.csv"), "\naverage,"));
  EXPECT_NE(run("benchmark --series 1 --agents 4 --holdout 0.1 --out tiny"), 0);
  EXPECT_TRUE(contains(log_, "rounds to zero")) << log_;
}

TEST_F(Cli, PermtestRerun) {
  simulate_small();
  write("friends.csv", "agent_a,agent_b\n1,2\n2,3\n4,5\n6,7\n7,8\n");
  expect_rerun_identical(
      "permtest --friends friends.csv --surveys sim/surveys.csv --agents 8 --steps 30 "
      "--permutations 199 --seed 6 --out perm",
      "perm");
  EXPECT_TRUE(fs::exists(dir_ / "perm" / "permtest.csv"));
}

TEST_F(Cli, FitDurationsRerun) {
  write("runs.csv", "duration\n1\n3\n2\n5\n1\n");
  expect_rerun_identical("fit-durations --runs runs.csv --out dur", "dur");
  EXPECT_TRUE(contains(read("dur/duration_fit.csv"), "2.4"));
  simulate_small();
  expect_rerun_identical("fit-durations --surveys sim/surveys.csv --agents 8 --steps 30 --out dur2",
                         "dur2");
  write("bad.csv", "duration\n0\n");
  EXPECT_NE(run("fit-durations --runs bad.csv --out bad"), 0);
}

TEST_F(Cli, ExportHeatmapRerun) {
  simulate_small();
  ASSERT_EQ(run("infer --contacts sim/contacts.csv --surveys sim/surveys.csv --agents 8 --steps 30 "
                "--seed 2 --iterations 200 --burn-in 20 --out inf"),
            0)
      << log_;
  expect_rerun_identical(
      "export-heatmap --marginals inf/marginals.csv --contacts sim/contacts.csv "
      "--start-date 2009-02-27 --out heat",
      "heat");
  EXPECT_TRUE(contains(read("heat/heatmap.csv"), ",2009-02-27,2009-02-28,"));
  EXPECT_NE(run("export-heatmap --marginals inf/marginals.csv --contacts sim/contacts.csv "
                "--start-date 2009-13-01 --out bad"),
            0);
}

TEST_F(Cli, UnknownSubcommandFails) {
  EXPECT_NE(run("fit"), 0);
  EXPECT_NE(run(""), 0);
}
