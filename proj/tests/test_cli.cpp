#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "scanstat/table_io.hpp"

namespace fs = std::filesystem;
using namespace scanstat;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("scanstat_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Result run(const std::string& args) const {
    const std::string cmd = std::string(SCANSTAT_CLI_PATH) + " " + args + " > " + path("stdout") + " 2> " +
                            path("stderr");
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(path("stdout")), slurp(path("stderr"))};
  }

  static Table parse(const std::string& text) {
    std::istringstream is(text);
    return read_table(is);
  }

  static std::string config(const std::string& name) { return std::string(SCANSTAT_CONFIG_DIR) + "/" + name; }

  fs::path dir_;
};

const char* kSmall = R"({"model": "minesweeper", "p": 0.1, "source_cols": 44, "source_rows": 44,
  "m1": 3, "m2": 3, "thresholds": [31, 32, 33], "iter": 2000, "sim_replicas": 2000, "seed": 4})";

TEST_F(Cli, ValidateConfigPrintsResolvedJson) {
  const auto r = run("validate-config --config " + config("table1_p01.json"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\"source_cols\": 44"), std::string::npos);
}

TEST_F(Cli, InvalidConfigNamesKey) {
  const auto cfg = write("bad.json", R"({"model": "minesweeper", "p": 2, "source_cols": 44, "source_rows": 44})");
  const auto r = run("validate-config --config " + cfg);
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("p:"), std::string::npos) << r.err;
}

TEST_F(Cli, ApproximateWritesTable) {
  const auto cfg = write("small.json", kSmall);
  const auto r = run("approximate --config " + cfg + " --output " + path("t.tsv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const Table t = parse(slurp(path("t.tsv")));
  ASSERT_EQ(t.cells.size(), 3u);
  EXPECT_EQ(t.columns.front(), "n");
  EXPECT_NE(t.meta("config"), nullptr);
  EXPECT_NE(t.meta("quv_sampling"), nullptr);
  EXPECT_NE(t.meta("row n=31"), nullptr);
  EXPECT_NE(t.meta("wall_time_s"), nullptr);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_GT(t.value(k, "approx"), 0.5);
    EXPECT_LE(t.value(k, "approx"), 1.0);
  }
}

TEST_F(Cli, FlagsOverrideFileKeys) {
  const auto cfg = write("small.json", kSmall);
  ASSERT_EQ(run("approximate --config " + cfg + " --seed 9 --output " + path("a.tsv")).status, 0);
  ASSERT_EQ(run("approximate --config " + cfg + " --seed 9 --threads 2 --output " + path("b.tsv")).status, 0);
  ASSERT_EQ(run("approximate --config " + cfg + " --output " + path("c.tsv")).status, 0);
  const Table a = parse(slurp(path("a.tsv"))), b = parse(slurp(path("b.tsv"))), c = parse(slurp(path("c.tsv")));
  EXPECT_EQ(a.cells, b.cells);
  EXPECT_NE(a.cells, c.cells);
  EXPECT_NE(a.meta("config")->find("\"seed\":9"), std::string::npos);

  const auto r = run("approximate --config " + cfg + " --iter 5000 --l-mode optimize --raw");
  ASSERT_EQ(r.status, 0) << r.err;
  const Table raw = parse(r.out);
  EXPECT_NE(raw.meta("config")->find("\"iter\":5000"), std::string::npos);
  EXPECT_EQ(*raw.meta("l_mode"), "optimize");
}

TEST_F(Cli, EmptyThresholdListSucceeds) {
  const auto cfg = write("empty.json", R"({"model": "minesweeper", "p": 0.1, "source_cols": 44,
    "source_rows": 44, "thresholds": [], "iter": 1000})");
  const auto r = run("approximate --config " + cfg);
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(parse(r.out).cells.empty());
}

TEST_F(Cli, SimulateZeroReplicasFails) {
  const auto cfg = write("small.json", kSmall);
  const auto r = run("simulate --config " + cfg + " --replicas 0");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("replicas must be ≥ 1"), std::string::npos) << r.err;
}

TEST_F(Cli, SimulateDegenerateStepFunction) {
  const auto cfg = write("zero.json", R"({"model": "minesweeper", "p": 0, "source_cols": 20, "source_rows": 20,
    "thresholds": [-1, 0, 1], "sim_replicas": 1000})");
  const auto r = run("simulate --config " + cfg);
  ASSERT_EQ(r.status, 0) << r.err;
  const Table t = parse(r.out);
  EXPECT_EQ(t.value(0, "sim"), 0.0);
  EXPECT_EQ(t.value(1, "sim"), 1.0);
  EXPECT_EQ(t.value(2, "sim"), 1.0);
}

TEST_F(Cli, PlotdataPairsAndChecksAlignment) {
  const auto cfg = write("small.json", kSmall);
  ASSERT_EQ(run("approximate --config " + cfg + " --output " + path("a.tsv")).status, 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --output " + path("s.tsv")).status, 0);
  const auto r = run("plotdata --approx " + path("a.tsv") + " --sim " + path("s.tsv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const Table p = parse(r.out);
  ASSERT_EQ(p.cells.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LE(p.value(k, "lower"), p.value(k, "approx"));
    EXPECT_LE(p.value(k, "approx"), p.value(k, "upper"));
    EXPECT_FALSE(std::isnan(p.value(k, "sim")));
  }
  const auto alone = parse(run("plotdata --approx " + path("a.tsv")).out);
  EXPECT_EQ(alone.cells[0][alone.column("sim")], "");

  const auto other = write("other.json", R"({"model": "minesweeper", "p": 0.1, "source_cols": 44,
    "source_rows": 44, "thresholds": [30, 31], "sim_replicas": 1000})");
  ASSERT_EQ(run("simulate --config " + other + " --output " + path("s2.tsv")).status, 0);
  const auto bad = run("plotdata --approx " + path("a.tsv") + " --sim " + path("s2.tsv"));
  EXPECT_NE(bad.status, 0);
}

TEST_F(Cli, ApproximateWithSimulationColumn) {
  const auto cfg = write("small.json", kSmall);
  const auto r = run("approximate --config " + cfg + " --sim --replicas 1000");
  ASSERT_EQ(r.status, 0) << r.err;
  const Table t = parse(r.out);
  EXPECT_EQ(t.columns[1], "sim");
}

TEST_F(Cli, InterpolatedPathReportsBrackets) {
  const auto cfg = write("ma.json", R"({"model": "ma", "coeffs": [0.3, 0.1, 0.5], "cols": 200, "m1": 20,
    "thresholds": [14, 16], "iter": 1000})");
  const auto r = run("approximate --config " + cfg);
  ASSERT_EQ(r.status, 0) << r.err;
  const Table t = parse(r.out);
  EXPECT_EQ(*t.meta("path"), "interpolated");
  EXPECT_TRUE(t.has_column("bracket_lower"));
  EXPECT_TRUE(t.has_column("bracket_upper"));
}

}  // namespace
