#include <gtest/gtest.h>

#include "exactml/compile.hpp"
#include "exactml/error.hpp"
#include "exactml/oracle.hpp"
#include "support.hpp"

namespace exactml {
namespace {

TEST(Oracle, ConstantZeroNeverPredictsOne) {
  const auto d = InputDomain::graph(3);
  const auto truth = binary_truth(builtin_graph_property(GraphProperty::transitive, 3));
  const auto r = brute_learnability(DecisionTree({TreeLeaf{0}}, 0, 2, d), truth, d);
  EXPECT_EQ(r.counts.at("label_1.fp"), 0);
  EXPECT_EQ(r.counts.at("label_1.tp"), 0);
  EXPECT_EQ(r.counts.at("label_1.fn"), 171);
  EXPECT_EQ(r.domain_size, 512);
}

TEST(Oracle, SinglePointDomain) {
  const InputDomain d({{"a", 3, 3}, {"b", -1, -1}});
  const auto truth = binary_truth(parse_predicate("a > b", d));
  const auto r = brute_learnability(DecisionTree({TreeLeaf{1}}, 0, 2, d), truth, d);
  BigInt total = 0;
  for (const auto& [key, v] : r.counts) {
    EXPECT_TRUE(v == 0 || v == 1) << key;
    if (key.rfind("label_1.", 0) == 0) total += v;
  }
  EXPECT_EQ(total, 1);
}

TEST(Oracle, CountRootBySimulation) {
  std::vector<FeatureSpec> fs;
  for (int i = 0; i < 16; ++i) fs.push_back({"b" + std::to_string(i), 0, 1});
  const InputDomain d(fs);
  Circuit c(d);
  EXPECT_EQ(brute_count_root(c, c.constant(true), d), 65536);

  const auto g = InputDomain::graph(4);
  Circuit cg(g);
  const Wire anti = compile_predicate(cg, builtin_graph_property(GraphProperty::antisymmetric, 4));
  EXPECT_EQ(brute_count_root(cg, anti, g), 11664);
  OracleOptions threaded;
  threaded.threads = 3;
  EXPECT_EQ(brute_count_root(cg, anti, g, threaded), 11664);
}

TEST(Oracle, CountRootOnSubDomain) {
  const InputDomain d({{"a", 0, 9}, {"b", 0, 9}});
  Circuit c(d);
  const InputDomain sub({{"a", 2, 4}, {"b", 0, 9}});
  EXPECT_EQ(brute_count_root(c, c.constant(true), sub), 30);
  const InputDomain outside({{"a", 2, 12}, {"b", 0, 9}});
  EXPECT_THROW(brute_count_root(c, c.constant(true), outside), InputError);
}

TEST(Oracle, CapRefusesLargeDomains) {
  std::vector<FeatureSpec> fs;
  for (int i = 0; i < 25; ++i) fs.push_back({"b" + std::to_string(i), 0, 1});
  const InputDomain d(fs);
  try {
    brute_count_predicate(Predicate::truth(true), d);
    FAIL();
  } catch (const CapExceeded& e) {
    EXPECT_STREQ(e.what(), "domain too large for oracle");
  }
}

TEST(Oracle, FingerprintIgnoresSharding) {
  testing::Rng rng(6);
  const auto d = testing::random_domain(rng, 12);
  const auto tree = testing::random_tree(rng, d, 4, 2);
  const auto truth = testing::random_truth(rng, d, 2);
  const auto one = brute_learnability(tree, truth, d);
  for (unsigned t : {2u, 3u, 7u}) {
    OracleOptions o;
    o.threads = t;
    const auto many = brute_learnability(tree, truth, d, o);
    EXPECT_EQ(many.fingerprint, one.fingerprint);
    EXPECT_EQ(many.counts, one.counts);
  }
  // Visiting a different space changes the fingerprint.
  EXPECT_NE(brute_learnability(tree, truth, d.restrict({{0, d.feature(0).lo}})).fingerprint, one.fingerprint);
}

TEST(Oracle, SafetyAndRobustness) {
  const InputDomain d({{"f0", 0, 1}, {"f1", 0, 1}});
  const DecisionTree tree({TreeSplit{0, 0, 1, 2}, TreeLeaf{1}, TreeLeaf{0}}, 0, 2, d);
  const auto s = brute_safety(tree, make_safety(parse_predicate("f0 <= 0", d), "1"), d);
  EXPECT_EQ(s.counts.at("sat"), 2);
  EXPECT_EQ(s.counts.at("viol"), 0);
  EXPECT_EQ(s.counts.at("pre"), 2);
  const auto r = brute_robustness(tree, make_region(std::vector<std::int64_t>{0, 0}, 1, d));
  EXPECT_EQ(r.counts.at("region"), 4);
  EXPECT_EQ(r.counts.at("correct"), 2);
}

TEST(Oracle, ReportDocument) {
  const InputDomain d({{"f0", 0, 1}});
  const auto r = brute_safety(DecisionTree({TreeLeaf{0}}, 0, 2, d), make_safety(Predicate::truth(true), "0"), d);
  const auto doc = report_json(r, "safety");
  EXPECT_EQ(doc["kind"], "oracle");
  EXPECT_EQ(doc["counts"]["sat"], "2");
  EXPECT_EQ(doc["fingerprint"].get<std::string>().size(), 16u);
}

}  // namespace
}  // namespace exactml
