#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "exactml/cli.hpp"
#include "exactml/cnf.hpp"

namespace exactml {
namespace {

namespace fs = std::filesystem;

std::string sample(const std::string& name) { return std::string(EXACTML_SAMPLES_DIR) + "/" + name; }

struct Run {
  int code;
  std::string out;
  std::string err;
  nlohmann::json doc() const { return nlohmann::json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("exactml_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
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
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

TEST_F(Cli, LearnabilityOnGraphFour) {
  const auto r = cli({"learnability", "--domain", "graph4", "--model", sample("reflexive4_tree.json"), "--property",
                      "Reflexive"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = r.doc();
  EXPECT_EQ(doc["kind"], "learnability");
  EXPECT_EQ(doc["domain_size"], "65536");
  EXPECT_TRUE(doc["complete"].get<bool>());
  const auto& l1 = doc["labels"][1];
  EXPECT_EQ(l1["label"], 1);
  EXPECT_EQ(std::stoll(l1["counts"]["tp"].get<std::string>()) + std::stoll(l1["counts"]["fn"].get<std::string>()),
            4096);
  EXPECT_EQ(l1["accuracy"]["decimal"], "1.0000");
}

TEST_F(Cli, NodesImpliesGraphDomain) {
  const auto a = cli({"learnability", "--nodes", "4", "--model", sample("reflexive4_tree.json"), "--property",
                      "Reflexive"});
  const auto b = cli({"learnability", "--domain", "graph4", "--model", sample("reflexive4_tree.json"), "--property",
                      "Reflexive"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto bad = cli({"learnability", "--domain", "graph4", "--nodes", "3", "--model",
                        sample("reflexive4_tree.json"), "--property", "Reflexive"});
  EXPECT_EQ(bad.code, 1);
}

TEST_F(Cli, MacroAverage) {
  const auto r = cli({"learnability", "--domain", sample("binary2_domain.json"), "--model", sample("xor_tree.json"),
                      "--property", sample("truth_xor.json"), "--macro"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.doc().contains("macro_average"));
}

TEST_F(Cli, MissingModelNamesThePath) {
  const std::string missing = path("nope.json");
  const auto r = cli({"learnability", "--domain", "graph4", "--model", missing, "--property", "Reflexive"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, MalformedInputsAreInputErrors) {
  const std::string broken = write("broken.json", "{\"format_version\": 1, \"type\": \"decision_tree\"");
  EXPECT_EQ(cli({"learnability", "--domain", "graph4", "--model", broken, "--property", "Reflexive"}).code, 1);
  EXPECT_EQ(cli({"learnability", "--domain", "graph4", "--model", sample("reflexive4_tree.json"), "--property",
                 "Bogus"}).code,
            1);
  EXPECT_EQ(cli({"nonsense"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(Cli, BudgetExhaustionIsExitTwo) {
  const auto r = cli({"learnability", "--domain", "graph4", "--model", sample("reflexive4_tree.json"), "--property",
                      "Transitive", "--budget", "1"});
  EXPECT_EQ(r.code, 2);
  const auto doc = r.doc();
  EXPECT_FALSE(doc["complete"].get<bool>());
  EXPECT_FALSE(doc["gaps"].empty());
}

TEST_F(Cli, SafetyFromDocument) {
  const auto r = cli({"safety", "--domain", sample("binary2_domain.json"), "--model", sample("f0_low_tree.json"),
                      "--property", sample("safety_f0_low.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = r.doc();
  EXPECT_EQ(doc["sat_count"], "2");
  EXPECT_EQ(doc["viol_count"], "0");
  EXPECT_EQ(doc["accuracy"]["decimal"], "1.0000");
}

TEST_F(Cli, SafetyAllLabelsAllowed) {
  const auto r = cli({"safety", "--domain", sample("binary2_domain.json"), "--model", sample("xor_tree.json"),
                      "--post", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["accuracy"]["decimal"], "1.0000");
  EXPECT_EQ(r.doc()["pre_size"], "4");
}

TEST_F(Cli, VacuousSafetySucceeds) {
  const auto r = cli({"safety", "--domain", sample("binary2_domain.json"), "--model", sample("xor_tree.json"),
                      "--property", sample("safety_vacuous.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = r.doc();
  EXPECT_EQ(doc["pre_size"], "0");
  EXPECT_TRUE(doc["vacuous"].get<bool>());
  EXPECT_EQ(doc["accuracy"], "vacuous property");
}

TEST_F(Cli, SafetyRejectsMixedSources) {
  EXPECT_EQ(cli({"safety", "--domain", sample("binary2_domain.json"), "--model", sample("xor_tree.json"),
                 "--property", sample("safety_vacuous.json"), "--post", "1"})
                .code,
            1);
}

TEST_F(Cli, Robustness) {
  const std::vector<std::string> base{"robustness", "--domain", sample("binary2_domain.json"), "--model",
                                      sample("xor_tree.json"), "--center", "0,0"};
  auto args = base;
  args.insert(args.end(), {"--epsilon", "1"});
  const auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["robustness"]["decimal"], "0.5000");
  EXPECT_EQ(r.doc()["region_size"], "4");

  args = base;
  args.insert(args.end(), {"--epsilon", "0"});
  EXPECT_EQ(cli(args).doc()["robustness"]["decimal"], "1.0000");

  const auto outside = cli({"robustness", "--domain", sample("binary2_domain.json"), "--model",
                            sample("xor_tree.json"), "--center", "0,5", "--epsilon", "1"});
  EXPECT_EQ(outside.code, 1);
  EXPECT_FALSE(outside.err.empty());
}

TEST_F(Cli, RobustnessBaseline) {
  const auto r = cli({"robustness", "--domain", sample("binary2_domain.json"), "--model", sample("xor_tree.json"),
                      "--center", "0,0", "--epsilon", "1", "--samples", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto b = r.doc()["baseline"];
  EXPECT_EQ(b["seed"], 0x5eedc0de);
  EXPECT_EQ(b["robustness"]["drawn"], 200);
}

TEST_F(Cli, EmitPshowAndRoundTrip) {
  const std::string cnf = path("f.cnf");
  const auto r = cli({"emit", "--domain", "graph4", "--model", sample("reflexive4_tree.json"), "--property",
                      "Reflexive", "--dialect", "pshow", "--out", cnf});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("projection variables: 16"), std::string::npos);
  const std::string text = slurp(cnf);
  std::istringstream lines(text);
  int shows = 0;
  for (std::string line; std::getline(lines, line);) shows += line.rfind("c p show", 0) == 0;
  EXPECT_EQ(shows, 1);
  EXPECT_EQ(emit_dimacs(parse_dimacs(text), DimacsDialect::pshow_comment), text);

  const auto counted = cli({"count", cnf});
  ASSERT_EQ(counted.code, 0) << counted.err;
  EXPECT_EQ(counted.out, "s mc 4096\n");
}

TEST_F(Cli, EmitToStdoutReportsOnStderr) {
  const auto r = cli({"emit", "--mode", "truth", "--domain", "graph3", "--property", "Reflexive"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("p cnf ", 0), 0u);
  EXPECT_NE(r.err.find("projection variables: 9"), std::string::npos);
}

TEST_F(Cli, EmitWithFixedInputsShrinks) {
  const std::vector<std::string> base{"emit", "--domain", sample("net2_domain.json"), "--model",
                                      sample("net2.json"), "--mode", "safety", "--post", "0"};
  const auto full = cli(base);
  auto fixed_args = base;
  fixed_args.insert(fixed_args.end(), {"--fix", "x0=3"});
  const auto fixed = cli(fixed_args);
  ASSERT_EQ(fixed.code, 0) << fixed.err;
  const auto a = parse_dimacs(full.out);
  const auto b = parse_dimacs(fixed.out);
  EXPECT_LT(b.num_vars, a.num_vars);
  EXPECT_LT(b.clauses.size(), a.clauses.size());
}

TEST_F(Cli, CountBudget) {
  const std::string cnf = path("t.cnf");
  ASSERT_EQ(cli({"emit", "--mode", "truth", "--domain", "graph4", "--property", "Transitive", "--out", cnf}).code, 0);
  EXPECT_EQ(cli({"count", cnf}).out, "s mc 3994\n");
  const auto r = cli({"count", cnf, "--budget", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.out, "s mc unknown\n");
}

TEST_F(Cli, OracleDiff) {
  const std::string report = path("report.json");
  const std::vector<std::string> common{"--domain", sample("net2_domain.json"), "--model", sample("net2.json"),
                                        "--post", "0", "--pre", "x0 > x1"};
  auto args = std::vector<std::string>{"safety"};
  args.insert(args.end(), common.begin(), common.end());
  args.insert(args.end(), {"--out", report});
  ASSERT_EQ(cli(args).code, 0);

  args = {"oracle", "--mode", "safety", "--diff", report};
  args.insert(args.end(), common.begin(), common.end());
  const auto ok = cli(args);
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.doc()["kind"], "oracle");

  auto doc = nlohmann::json::parse(slurp(report));
  doc["viol_count"] = std::to_string(std::stoll(doc["viol_count"].get<std::string>()) + 1);
  write("report.json", doc.dump());
  const auto bad = cli(args);
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("oracle mismatch at viol"), std::string::npos);
}

TEST_F(Cli, OracleDiffLearnability) {
  const std::string report = path("learn.json");
  ASSERT_EQ(cli({"learnability", "--domain", "graph3", "--model", sample("constant0_tree.json"), "--property",
                 "Equivalence", "--out", report})
                .code,
            0);
  const auto r = cli({"oracle", "--domain", "graph3", "--model", sample("constant0_tree.json"), "--property",
                      "Equivalence", "--diff", report, "--threads", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, OracleRefusesHugeDomains) {
  const auto r = cli({"oracle", "--domain", "graph5", "--model", sample("constant0_tree.json"), "--property",
                      "Reflexive"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("domain too large for oracle"), std::string::npos);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  const std::vector<std::string> args{"learnability", "--domain", sample("pixels_domain.json"), "--model",
                                      sample("pixels_tree.json"), "--property", sample("truth_xor.json")};
  // truth_xor names f0/f1, which the pixel domain lacks.
  EXPECT_EQ(cli(args).code, 1);
  const std::vector<std::string> learn{"learnability", "--domain", "graph4", "--model", sample("reflexive4_tree.json"),
                                       "--property", "Antisymmetric", "--threads", "4", "--samples", "50"};
  const auto a = cli(learn);
  const auto b = cli(learn);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

}  // namespace
}  // namespace exactml
