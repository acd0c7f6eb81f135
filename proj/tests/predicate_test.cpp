#include <gtest/gtest.h>

#include <map>

#include "exactml/error.hpp"
#include "exactml/predicate.hpp"
#include "support.hpp"

namespace exactml {
namespace {

using testing::graph_count;
using testing::graph_holds;
using testing::graph_input;
using P = GraphProperty;

const InputDomain kFour({{"f0", 0, 3}, {"f1", 0, 3}, {"f2", -2, 2}, {"f3", 0, 1}});

std::vector<std::int64_t> v(std::initializer_list<std::int64_t> xs) { return xs; }

TEST(Parse, Conjunction) {
  const auto p = parse_predicate("f0 <= 3 && f1 = 0", kFour);
  EXPECT_EQ(p.kind(), Predicate::Kind::conjunction);
  EXPECT_EQ(p.children().size(), 2u);
  EXPECT_TRUE(p.eval(v({3, 0, 0, 0})));
  EXPECT_FALSE(p.eval(v({3, 1, 0, 0})));
}

TEST(Parse, QuantifierExpansion) {
  const auto d = InputDomain::graph(2);
  const auto p = parse_predicate("forall i in [0,2): e[i][i] = 1", d);
  EXPECT_EQ(p.kind(), Predicate::Kind::conjunction);
  EXPECT_EQ(p.to_string(d), "(e[0][0] = 1 && e[1][1] = 1)");
  const auto q = parse_predicate("exists i, j in [0,1]: i != j && e[i][j] = 1", d);
  EXPECT_TRUE(q.eval(v({0, 1, 0, 0})));
  EXPECT_FALSE(q.eval(v({1, 0, 0, 1})));
}

TEST(Parse, UnknownFeatureHasPosition) {
  try {
    parse_predicate("f0 = 1 || f9 <= 1", kFour);
    FAIL();
  } catch (const PredicateSyntaxError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown feature"), std::string::npos);
    EXPECT_EQ(e.position(), 10u);
  }
}

TEST(Parse, SyntaxErrors) {
  EXPECT_THROW(parse_predicate("f0 <=", kFour), PredicateSyntaxError);
  EXPECT_THROW(parse_predicate("(f0 = 1", kFour), PredicateSyntaxError);
  EXPECT_THROW(parse_predicate("f0 = 1 $", kFour), PredicateSyntaxError);
  EXPECT_THROW(parse_predicate("3", kFour), PredicateSyntaxError);
  EXPECT_THROW(parse_predicate("forall i in [0,f0): f1 = i", kFour), PredicateSyntaxError);
  EXPECT_THROW(parse_predicate("", kFour), PredicateSyntaxError);
}

TEST(Parse, OperatorsAndPrecedence) {
  const auto p = parse_predicate("not f3 or f0 > f1 and f2 >= -1 -> f1 != 2", kFour);
  for (DomainCursor c(kFour); !c.done(); c.next()) {
    const auto& x = c.value();
    const bool lhs = x[3] == 0 || (x[0] > x[1] && x[2] >= -1);
    EXPECT_EQ(p.eval(x), !lhs || x[1] != 2);
  }
}

TEST(Parse, BareFeatureIsNonZero) {
  const auto p = parse_predicate("f2 && !f3", kFour);
  EXPECT_TRUE(p.eval(v({0, 0, -1, 0})));
  EXPECT_FALSE(p.eval(v({0, 0, 0, 0})));
  EXPECT_FALSE(p.eval(v({0, 0, 1, 1})));
}

TEST(Parse, ConstantsFold) {
  EXPECT_EQ(parse_predicate("true && false", kFour).kind(), Predicate::Kind::constant);
  EXPECT_EQ(parse_predicate("forall i in [0,0): f0 = i", kFour).kind(), Predicate::Kind::constant);
  EXPECT_TRUE(parse_predicate("forall i in [0,0): f0 = i", kFour).constant_value());
  EXPECT_TRUE(parse_predicate("1 < 2", kFour).constant_value());
}

TEST(Eval, DomainChecked) {
  const auto p = parse_predicate("f0 = 0", kFour);
  EXPECT_THROW(eval_predicate(p, kFour, v({9, 0, 0, 0})), InputError);
  EXPECT_TRUE(eval_predicate(p, kFour, v({0, 0, 0, 0})));
}

TEST(GraphProperties, NamesRoundTrip) {
  for (P p : kAllGraphProperties) EXPECT_EQ(parse_graph_property(graph_property_name(p)), p);
  EXPECT_EQ(parse_graph_property("pre_order"), P::pre_order);
  EXPECT_EQ(parse_graph_property("non-strict order"), P::non_strict_order);
  EXPECT_THROW(parse_graph_property("acyclic"), InputError);
}

TEST(GraphProperties, ExamplesAtFourNodes) {
  const auto reflexive = builtin_graph_property(P::reflexive, 4);
  EXPECT_TRUE(reflexive.eval(graph_input(4, 0xffff)));
  EXPECT_FALSE(reflexive.eval(graph_input(4, 0)));
  // e[0][1] and e[1][2] without e[0][2]
  const auto transitive = builtin_graph_property(P::transitive, 4);
  EXPECT_FALSE(transitive.eval(graph_input(4, (1u << 1) | (1u << 6))));
}

// Agreement with the bitmask definitions on every graph with up to 3 nodes.
TEST(GraphProperties, MatchBitmaskDefinitions) {
  for (int n = 1; n <= 3; ++n)
    for (P p : kAllGraphProperties) {
      const auto pred = builtin_graph_property(p, n);
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << (n * n)); ++m)
        ASSERT_EQ(pred.eval(graph_input(n, m)), graph_holds(p, n, m)) << graph_property_name(p) << " n=" << n;
    }
}

// Satisfying-graph counts, computed once by an independent enumeration and frozen.
const std::map<P, std::vector<std::uint64_t>> kFrozenCounts{
    {P::antisymmetric, {2, 12, 216, 11664}}, {P::connex, {2, 12, 216, 11664}},
    {P::equivalence, {1, 2, 5, 15}},         {P::irreflexive, {1, 4, 64, 4096}},
    {P::non_strict_order, {1, 3, 19, 219}},  {P::partial_order, {1, 3, 19, 219}},
    {P::pre_order, {1, 4, 29, 355}},         {P::reflexive, {1, 4, 64, 4096}},
    {P::strict_order, {1, 3, 19, 219}},      {P::total_order, {1, 2, 6, 24}},
    {P::transitive, {2, 13, 171, 3994}},
};

TEST(GraphProperties, FrozenCountsAgreeWithBitmaskOracle) {
  for (const auto& [p, counts] : kFrozenCounts)
    for (int n = 1; n <= 4; ++n) EXPECT_EQ(graph_count(p, n), counts[static_cast<std::size_t>(n - 1)]);
  EXPECT_EQ(kFrozenCounts.at(P::antisymmetric)[3], 16u * 729u);  // 2^4 * 3^6
}

TEST(GraphProperties, PredicateCountsAtFourNodes) {
  for (const auto& [p, counts] : kFrozenCounts) {
    const auto pred = builtin_graph_property(p, 4);
    std::uint64_t c = 0;
    for (std::uint64_t m = 0; m < 65536; ++m) c += pred.eval(graph_input(4, m)) ? 1 : 0;
    EXPECT_EQ(c, counts[3]) << graph_property_name(p);
  }
}

TEST(GraphProperties, PartialOrderImpliesPreOrder) {
  const auto po = builtin_graph_property(P::partial_order, 4);
  const auto pre = builtin_graph_property(P::pre_order, 4);
  for (std::uint64_t m = 0; m < 65536; ++m) {
    const auto x = graph_input(4, m);
    if (po.eval(x)) ASSERT_TRUE(pre.eval(x));
  }
}

TEST(Truth, BinaryAndDocuments) {
  const auto p = parse_predicate("f3 = 1", kFour);
  const auto t = binary_truth(p);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_TRUE(t[0].eval(v({0, 0, 0, 0})));
  EXPECT_TRUE(t[1].eval(v({0, 0, 0, 1})));
  const auto labels = load_truth(nlohmann::json::parse(R"({"format_version":1,"labels":["f0=0","f0=1","f0>1"]})"), kFour);
  EXPECT_EQ(labels.size(), 3u);
  EXPECT_THROW(load_truth(nlohmann::json::parse(R"({"format_version":1})"), kFour), InputError);
}

TEST(Safety, LabelSets) {
  const auto s = make_safety(Predicate::truth(true), "!1");
  EXPECT_EQ(s.allowed(3), (std::vector<ClassLabel>{0, 2}));
  EXPECT_EQ(make_safety(Predicate::truth(true), "2,0").allowed(3), (std::vector<ClassLabel>{0, 2}));
  EXPECT_THROW(make_safety(Predicate::truth(true), "4").allowed(3), InputError);
  const auto doc = load_safety(nlohmann::json::parse(R"({"format_version":1,"pre":"f0 <= 1","post":{"not":[0]}})"), kFour);
  EXPECT_EQ(doc.allowed(2), (std::vector<ClassLabel>{1}));
}

TEST(Region, SizesAndClipping) {
  const InputDomain d({{"p", 0, 255}, {"q", 0, 255}, {"r", 0, 255}, {"s", 0, 255}});
  EXPECT_EQ(make_region(v({10, 10, 10, 10}), 1, d).size, 81);
  EXPECT_EQ(make_region(v({0, 10, 10, 10}), 1, d).size, 54);
  EXPECT_EQ(make_region(v({10, 10, 10, 10}), 0, d).size, 1);
  EXPECT_EQ(make_region(v({255, 0, 3, 3}), 300, d).size, d.cardinality());
  EXPECT_THROW(make_region(v({1, 1, 1, 1}), -1, d), InputError);
}

TEST(Region, SizeMatchesMembership) {
  const InputDomain d({{"a", -2, 3}, {"b", 0, 4}, {"c", 0, 1}});
  for (DomainCursor center(d); !center.done(); center.next())
    for (std::int64_t eps = 0; eps <= 3; ++eps) {
      const auto r = make_region(center.value(), eps, d);
      BigInt members = 0;
      for (DomainCursor x(d); !x.done(); x.next())
        if (r.contains(x.value())) ++members;
      ASSERT_EQ(members, r.size);
      ASSERT_EQ(r.as_domain(d).cardinality(), r.size);
    }
}

}  // namespace
}  // namespace exactml
