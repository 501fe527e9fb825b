#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "subscan/cli.hpp"

namespace subscan {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("subscan_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // Small planted cohort written via the synth command.
  std::string make_cohort(const std::string& sub = "cohort") const {
    const auto out = path(sub);
    EXPECT_EQ(cli::run({"synth", "--records", "800", "--cardinalities", "2,3,2", "--planted", "f0=c0;f1=c1|c2",
                        "--odds-multiplier", "4", "--base-rate", "0.08", "--seed", "11", "--out", out}),
              0);
    return out + "/cohort.csv";
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageAndInputErrors) {
  EXPECT_EQ(cli::run({"scan", "--input", path("missing.csv")}), cli::kUsage);
  EXPECT_EQ(cli::run({"scan", "--bogus", "1"}), cli::kUsage);
  EXPECT_EQ(cli::run({}), cli::kUsage);
  const auto csv = make_cohort();
  EXPECT_EQ(cli::run({"scan", "--input", csv, "--restarts", "0", "--out", path("o")}), cli::kUsage);
  EXPECT_EQ(cli::run({"scan", "--input", csv, "--alpha", "1.5", "--out", path("o")}), cli::kUsage);
  EXPECT_EQ(cli::run({"scan", "--input", csv, "--outcome", "nope", "--out", path("o")}), cli::kUsage);
  EXPECT_EQ(cli::run({"rank", "--input", csv, "--out", path("o")}), cli::kUsage);  // no scan report
}

TEST_F(CliTest, DegenerateOutcomeExitsThree) {
  write("flat.csv", "A,B,y\na,b,0\nb,a,0\na,a,0\n");
  EXPECT_EQ(cli::run({"scan", "--input", path("flat.csv"), "--out", path("o")}), cli::kDegenerate);
  EXPECT_EQ(cli::run({"pipeline", "--input", path("flat.csv"), "--out", path("o")}), cli::kDegenerate);
}

TEST_F(CliTest, SynthIsDeterministicAndValidated) {
  const auto a = read(make_cohort("a"));
  const auto b = read(make_cohort("b"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  const auto planted = json::parse(read(path("a/planted.json")));
  EXPECT_EQ(planted["planted"][1]["values"], json::array({"c1", "c2"}));
  EXPECT_EQ(cli::run({"synth", "--odds-multiplier", "1", "--out", path("x")}), cli::kUsage);
  EXPECT_EQ(cli::run({"synth", "--planted", "f9=c0", "--out", path("x")}), cli::kUsage);
  EXPECT_EQ(cli::run({"synth", "--cardinalities", "2,0", "--out", path("x")}), cli::kUsage);
}

TEST_F(CliTest, ScanRankSubstituteChain) {
  const auto csv = make_cohort();
  const auto out = path("run");
  ASSERT_EQ(cli::run({"scan", "--input", csv, "--replicates", "19", "--restarts", "4", "--out", out}), 0);
  const auto scan = json::parse(read(out + "/scan.json"));
  EXPECT_EQ(scan["command"], "scan");
  EXPECT_EQ(scan["scan"]["null_scores"].size(), 19u);
  EXPECT_GT(scan["scan"]["panel"]["score"].get<double>(), 0.0);

  ASSERT_EQ(cli::run({"rank", "--input", csv, "--scan-report", out + "/scan.json", "--out", out}), 0);
  const auto rel = read(out + "/relevance.csv");
  EXPECT_EQ(rel.substr(0, rel.find('\n') + 1), "Rank,Feature,Value,E,Subset_Dev,Global_Dev,D.R\r\n");

  ASSERT_EQ(cli::run({"substitute", "--input", csv, "--scan-report", out + "/scan.json", "--replicates", "19",
                      "--out", out}),
            0);
  const auto subs = json::parse(read(out + "/substitutions.json"));
  EXPECT_TRUE(subs["substitutions"].is_array());
  const auto table = read(out + "/substitutions.csv");
  EXPECT_EQ(table.substr(0, table.find('\n') + 1),
            "Feature,Feature Value,Substitute,O_Score,N_Score,O_OR,N_OR,P_Value,P_At_Floor,Significant,Empty\r\n");
}

TEST_F(CliTest, RankRejectsEmptyDescriptorAndSubstituteAcceptsNoCandidates) {
  const auto csv = make_cohort();
  write("empty.json", R"({"scan": {"descriptor": []}})");
  EXPECT_EQ(cli::run({"rank", "--input", csv, "--scan-report", path("empty.json"), "--out", path("o")}),
            cli::kUsage);

  write("full.json", R"({"scan": {"descriptor": [{"feature": "f1", "values": ["c0", "c1", "c2"]}]}})");
  ASSERT_EQ(cli::run({"substitute", "--input", csv, "--scan-report", path("full.json"), "--replicates", "5",
                      "--out", path("o")}),
            0);
  EXPECT_TRUE(json::parse(read(path("o/substitutions.json")))["substitutions"].empty());
}

json without_metadata(const std::string& text) {
  auto j = json::parse(text);
  j.erase("metadata");
  return j;
}

TEST_F(CliTest, PipelineDeterministicAcrossRunsAndWorkers) {
  const auto csv = make_cohort();
  const std::vector<std::string> base = {"pipeline", "--input", csv, "--seed", "3", "--replicates", "19",
                                         "--restarts", "4"};
  std::vector<std::string> reports;
  for (const std::string workers : {"1", "1", "4"}) {
    auto args = base;
    const auto out = path("p" + std::to_string(reports.size()));
    for (const std::string a : {"--workers", workers.c_str(), "--out", out.c_str()}) args.push_back(a);
    ASSERT_EQ(cli::run(args), 0);
    reports.push_back(out);
  }
  const auto first = without_metadata(read(reports[0] + "/report.json"));
  for (const auto& r : reports) {
    EXPECT_EQ(without_metadata(read(r + "/report.json")).dump(), first.dump());
    for (const char* f : {"/relevance.csv", "/substitutions.csv", "/substitution_plot.csv"}) {
      EXPECT_EQ(read(r + f), read(reports[0] + f));
    }
  }
  for (const char* key : {"tool", "command", "config", "dataset", "scan", "relevance", "substitutions", "greedy"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const auto csv = make_cohort();
  write("cfg.json", R"({"restarts": 3, "seed": 5, "replicates": 9, "ranking": "global_deviation"})");
  ASSERT_EQ(cli::run({"scan", "--config", path("cfg.json"), "--input", csv, "--seed", "9", "--out", path("o")}), 0);
  const auto cfg = json::parse(read(path("o/scan.json")))["config"];
  EXPECT_EQ(cfg["seed"], 9);
  EXPECT_EQ(cfg["restarts"], 3);
  EXPECT_EQ(cfg["replicates"], 9);
  EXPECT_EQ(cfg["ranking"], "global_deviation");

  write("bad.json", R"({"restarts": 3, "colour": "red"})");
  EXPECT_EQ(cli::run({"scan", "--config", path("bad.json"), "--input", csv, "--out", path("o")}), cli::kUsage);
}

}  // namespace
}  // namespace subscan
