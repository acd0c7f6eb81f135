#include <gtest/gtest.h>

#include "exactml/circuit.hpp"
#include "exactml/compile.hpp"
#include "exactml/error.hpp"
#include "support.hpp"

namespace exactml {
namespace {

const InputDomain kBinary2({{"f0", 0, 1}, {"f1", 0, 1}});

DecisionTree xor_tree() {
  return DecisionTree({TreeSplit{0, 0, 1, 4}, TreeSplit{1, 0, 2, 3}, TreeLeaf{0}, TreeLeaf{1}, TreeSplit{1, 0, 5, 6},
                       TreeLeaf{1}, TreeLeaf{0}},
                      0, 2, kBinary2);
}

bool value_at(const Circuit& c, Wire w, std::span<const std::int64_t> x) { return c.simulate(x)[w.id]; }

TEST(Builder, HashConsingAndFolding) {
  Circuit c(kBinary2);
  const Wire a = c.input(0), b = c.input(1);
  EXPECT_EQ(c.make_and(a, b), c.make_and(b, a));
  EXPECT_EQ(c.make_and(a, c.constant(true)), a);
  EXPECT_EQ(c.make_and(a, c.constant(false)), c.constant(false));
  EXPECT_EQ(c.make_or(a, c.make_not(a)), c.constant(true));
  EXPECT_EQ(c.make_xor(a, a), c.constant(false));
  EXPECT_EQ(c.make_not(c.make_not(a)), a);
  EXPECT_EQ(c.constant_value(c.constant(true)), std::optional<bool>(true));
  EXPECT_EQ(c.constant_value(a), std::nullopt);
  const std::size_t before = c.size();
  c.make_and(b, a);
  EXPECT_EQ(c.size(), before);
}

TEST(Builder, Outputs) {
  Circuit c(kBinary2);
  c.set_output("x", c.input(0));
  EXPECT_TRUE(c.has_output("x"));
  EXPECT_THROW(c.set_output("x", c.input(1)), InputError);
  EXPECT_THROW(c.output("y"), InputError);
}

TEST(Builder, DomainConstraint) {
  const InputDomain d({{"a", 0, 4}});  // 3 bits, patterns 5..7 are outside
  Circuit c(d);
  std::vector<std::uint64_t> words(3, 0);
  for (unsigned lane = 0; lane < 8; ++lane)
    for (unsigned bit = 0; bit < 3; ++bit) words[bit] |= static_cast<std::uint64_t>((lane >> bit) & 1) << lane;
  const auto sim = c.simulate_lanes(words);
  EXPECT_EQ(sim[c.domain_constraint().id] & 0xff, 0x1fu);
  EXPECT_EQ(Circuit(kBinary2).domain_constraint(), c.constant(true));
}

// Every bundle operation checked against BigInt arithmetic over all inputs.
class Arithmetic : public ::testing::Test {
 protected:
  const InputDomain d{{{"a", -5, 6}, {"b", -3, 4}}};
  template <class Build, class Expect>
  void check(Build build, Expect expect) {
    Circuit c(d);
    const Bundle r = build(c, bits::feature_value(c, 0), bits::feature_value(c, 1));
    for (DomainCursor cur(d); !cur.done(); cur.next()) {
      const auto& x = cur.value();
      const BigInt want = expect(from_int64(x[0]), from_int64(x[1]));
      const auto sim = c.simulate(x);
      ASSERT_EQ(bundle_value(r, sim), want) << x[0] << "," << x[1];
      ASSERT_LE(r.lo, want);
      ASSERT_GE(r.hi, want);
    }
  }
};

TEST_F(Arithmetic, FeatureValues) {
  check([](Circuit&, Bundle a, Bundle) { return a; }, [](BigInt a, BigInt) { return a; });
  check([](Circuit&, Bundle, Bundle b) { return b; }, [](BigInt, BigInt b) { return b; });
}

TEST_F(Arithmetic, AddSubtract) {
  check([](Circuit& c, Bundle a, Bundle b) { return bits::add(c, a, b, false, 64); },
        [](BigInt a, BigInt b) { return BigInt(a + b); });
  check([](Circuit& c, Bundle a, Bundle b) { return bits::add(c, a, b, true, 64); },
        [](BigInt a, BigInt b) { return BigInt(a - b); });
}

TEST_F(Arithmetic, MultiplyByConstants) {
  for (long k : {-7L, -4L, -1L, 0L, 1L, 3L, 8L, 13L})
    check([k](Circuit& c, Bundle a, Bundle) { return bits::multiply(c, a, BigInt(k), 64); },
          [k](BigInt a, BigInt) { return BigInt(a * k); });
}

TEST_F(Arithmetic, Shifts) {
  for (unsigned s : {0u, 1u, 2u, 5u}) {
    check([s](Circuit& c, Bundle a, Bundle) { return bits::shift_right(c, a, s); },
          [s](BigInt a, BigInt) { return floor_shift(a, s); });
    check([s](Circuit& c, Bundle a, Bundle) { return bits::shift_left(c, a, s, 64); },
          [s](BigInt a, BigInt) { return BigInt(a * pow2(s)); });
  }
}

TEST_F(Arithmetic, ReluAndMux) {
  check([](Circuit& c, Bundle a, Bundle) { return bits::relu(c, a); },
        [](BigInt a, BigInt) { return a > 0 ? a : BigInt(0); });
  check([](Circuit& c, Bundle a, Bundle b) { return bits::mux(c, bits::signed_greater(c, a, b), a, b); },
        [](BigInt a, BigInt b) { return a > b ? a : b; });
}

TEST_F(Arithmetic, Comparisons) {
  Circuit c(d);
  const Bundle a = bits::feature_value(c, 0), b = bits::feature_value(c, 1);
  const Wire gt = bits::signed_greater(c, a, b);
  const Wire eq = bits::equal(c, a, b);
  const auto off = c.feature_bits(0);
  const Wire le3 = bits::unsigned_le_const(c, off, BigInt(3));
  for (DomainCursor cur(d); !cur.done(); cur.next()) {
    const auto& x = cur.value();
    const auto sim = c.simulate(x);
    EXPECT_EQ(sim[gt.id], x[0] > x[1]);
    EXPECT_EQ(sim[eq.id], x[0] == x[1]);
    EXPECT_EQ(sim[le3.id], x[0] - d.feature(0).lo <= 3);
  }
}

TEST(ArithmeticLimits, WidthOverflow) {
  const InputDomain d({{"a", 0, 255}});
  Circuit c(d);
  const Bundle a = bits::feature_value(c, 0);
  EXPECT_THROW(bits::multiply(c, a, BigInt(1000), 12), WidthOverflow);
  EXPECT_NO_THROW(bits::multiply(c, a, BigInt(1000), 20));
}

TEST(CompileTree, ConstantLeaf) {
  Circuit c = compile_tree(DecisionTree({TreeLeaf{0}}, 0, 2, kBinary2), kBinary2);
  EXPECT_EQ(c.output(model_output(0)), c.constant(true));
  EXPECT_EQ(c.output(model_output(1)), c.constant(false));
}

TEST(CompileTree, SingleSplitFoldsToInputBit) {
  const InputDomain d({{"f0", 0, 1}});
  Circuit c = compile_tree(DecisionTree({TreeSplit{0, 0, 1, 2}, TreeLeaf{1}, TreeLeaf{0}}, 0, 2, d), d);
  EXPECT_EQ(c.output(model_output(0)), c.input(0));
  EXPECT_EQ(c.output(model_output(1)), c.make_not(c.input(0)));
}

TEST(CompileTree, XorMatchesEval) {
  const auto t = xor_tree();
  const Circuit c = compile_tree(t, kBinary2);
  for (DomainCursor cur(kBinary2); !cur.done(); cur.next())
    for (ClassLabel l = 0; l < 2; ++l)
      EXPECT_EQ(value_at(c, c.output(model_output(l)), cur.value()), t.eval(cur.value()) == l);
}

void expect_one_hot_agreement(const Model& m, const std::vector<std::vector<std::int64_t>>& inputs) {
  const Circuit c = compile_model(m);
  for (const auto& x : inputs) {
    const auto sim = c.simulate(x);
    const ClassLabel want = evaluate(m, x);
    for (ClassLabel l = 0; l < num_labels(m); ++l)
      ASSERT_EQ(sim[c.output(model_output(l)).id], want == l) << "label " << l;
  }
}

TEST(CompileTree, RandomTreesMatchEval) {
  testing::Rng rng(11);
  for (int round = 0; round < 40; ++round) {
    const auto d = testing::random_domain(rng, 12);
    const auto t = testing::random_tree(rng, d, 6, 1 + round % 4);
    std::vector<std::vector<std::int64_t>> all;
    for (DomainCursor cur(d); !cur.done(); cur.next()) all.push_back(cur.value());
    expect_one_hot_agreement(t, all);
  }
}

TEST(CompileNetwork, IdentityIsComparison) {
  const InputDomain d({{"a", 0, 7}, {"b", 0, 7}});
  DenseLayer l;
  l.weights = {{1, 0}, {0, 1}};
  l.biases = {0, 0};
  const Circuit c = compile_network(QuantizedNetwork({l}, d), d);
  for (DomainCursor cur(d); !cur.done(); cur.next())
    EXPECT_EQ(value_at(c, c.output(model_output(0)), cur.value()), cur.value()[0] >= cur.value()[1]);
}

TEST(CompileNetwork, TiedLogitsFoldToLabelZero) {
  const InputDomain d({{"a", 0, 7}, {"b", 0, 7}});
  DenseLayer l;
  l.weights = {{0, 0}, {0, 0}};
  l.biases = {0, 0};
  const Circuit c = compile_network(QuantizedNetwork({l}, d), d);
  EXPECT_EQ(c.output(model_output(0)), c.constant(true));
  EXPECT_EQ(c.output(model_output(1)), c.constant(false));
}

TEST(CompileNetwork, RecordedBundlesMatchTrace) {
  testing::Rng rng(5);
  const auto d = testing::random_domain(rng, 10);
  const auto net = testing::random_network(rng, d, 2, 3);
  const Circuit c = compile_network(net, d);
  for (DomainCursor cur(d); !cur.done(); cur.next()) {
    const auto trace = net.trace(cur.value());
    const auto sim = c.simulate(cur.value());
    for (const auto& rec : c.bundles()) {
      std::size_t layer = 0, neuron = 0;
      char part[16] = {};
      if (std::sscanf(rec.name.c_str(), "layer%zu.n%zu.%15s", &layer, &neuron, part) != 3) continue;
      const std::string which = part;
      const auto& lt = trace[layer];
      const BigInt want = which == "affine" ? lt.affine[neuron] : which == "shifted" ? lt.shifted[neuron] : lt.output[neuron];
      ASSERT_EQ(bundle_value(rec.bundle, sim), want) << rec.name;
    }
  }
}

// 16 inputs -> 4 hidden -> 2 outputs.
TEST(CompileNetwork, SixteenInputNetwork) {
  testing::Rng rng(16);
  std::vector<FeatureSpec> fs;
  for (int i = 0; i < 16; ++i) fs.push_back({"x" + std::to_string(i), -2, 5});
  const InputDomain d(fs);
  DenseLayer hidden, out;
  hidden.weights.assign(4, std::vector<std::int64_t>(16));
  for (auto& row : hidden.weights)
    for (auto& w : row) w = testing::uniform(rng, -6, 6);
  hidden.biases = {3, -2, 0, 7};
  hidden.activation = Activation::relu;
  hidden.post_shift = 2;
  out.weights = {{2, -1, 3, 0}, {-1, 2, -2, 1}};
  out.biases = {1, 0};
  const QuantizedNetwork net({hidden, out}, d);

  std::vector<std::vector<std::int64_t>> inputs;
  for (int i = 0; i < 1000; ++i) inputs.push_back(testing::random_point(rng, d));
  expect_one_hot_agreement(net, inputs);

  // Exhaustive over a 2^12 sub-domain: four features free over their 8 values.
  inputs.clear();
  std::vector<FeatureSpec> sub = fs;
  for (std::size_t i = 4; i < 16; ++i) sub[i].lo = sub[i].hi = static_cast<std::int64_t>(i % 3);
  for (DomainCursor cur{InputDomain(sub)}; !cur.done(); cur.next()) inputs.push_back(cur.value());
  ASSERT_EQ(inputs.size(), 4096u);
  expect_one_hot_agreement(net, inputs);
}

TEST(CompileNetwork, RandomNetworksMatchEval) {
  testing::Rng rng(23);
  for (int round = 0; round < 20; ++round) {
    const auto d = testing::random_domain(rng, 11);
    const auto net = testing::random_network(rng, d, round % 3, 2 + round % 3);
    std::vector<std::vector<std::int64_t>> all;
    for (DomainCursor cur(d); !cur.done(); cur.next()) all.push_back(cur.value());
    expect_one_hot_agreement(net, all);
  }
}

TEST(CompilePredicate, ReflexiveIsDiagonalConjunction) {
  const auto d = InputDomain::graph(4);
  Circuit c(d);
  const Wire w = compile_predicate(c, builtin_graph_property(GraphProperty::reflexive, 4));
  std::vector<Wire> diag{c.input(0), c.input(5), c.input(10), c.input(15)};
  EXPECT_EQ(w, c.make_and(diag));
  EXPECT_EQ(compile_predicate(c, Predicate::truth(true)), c.constant(true));
}

TEST(CompilePredicate, MatchesEvaluation) {
  testing::Rng rng(3);
  for (int round = 0; round < 30; ++round) {
    const auto d = testing::random_domain(rng, 10);
    const auto preds = testing::random_truth(rng, d, 3);
    Circuit c(d);
    std::vector<Wire> ws;
    for (const auto& p : preds) ws.push_back(compile_predicate(c, p));
    for (DomainCursor cur(d); !cur.done(); cur.next()) {
      const auto sim = c.simulate(cur.value());
      for (std::size_t i = 0; i < preds.size(); ++i) ASSERT_EQ(sim[ws[i].id], preds[i].eval(cur.value()));
    }
  }
}

TEST(ComposeMetric, TruthEqualToModel) {
  Circuit c = compile_tree(xor_tree(), kBinary2);
  c.set_output(truth_output(0), c.output(model_output(0)));
  c.set_output(truth_output(1), c.output(model_output(1)));
  EXPECT_EQ(compose_metric(c, 1, MetricKind::tp), c.output(model_output(1)));
  EXPECT_EQ(compose_metric(c, 1, MetricKind::fp), c.constant(false));
  EXPECT_EQ(compose_metric(c, 0, MetricKind::fn), c.constant(false));
}

TEST(ConstrainRegion, RegionSizes) {
  const InputDomain d({{"p", 0, 255}, {"q", 0, 255}, {"r", 0, 255}, {"s", 0, 255}});
  Circuit c(d);
  const auto r = make_region(std::vector<std::int64_t>{10, 10, 10, 10}, 1, d);
  const Wire w = constrain_region(c, c.constant(true), r);
  // The root is true exactly on the region: check a few points around it.
  EXPECT_TRUE(value_at(c, w, std::vector<std::int64_t>{9, 11, 10, 10}));
  EXPECT_FALSE(value_at(c, w, std::vector<std::int64_t>{8, 10, 10, 10}));
  EXPECT_FALSE(value_at(c, w, std::vector<std::int64_t>{10, 10, 10, 12}));
  const auto full = make_region(std::vector<std::int64_t>{0, 0, 0, 0}, 255, d);
  EXPECT_EQ(constrain_region(c, c.input(3), full), c.input(3));
}

TEST(PartialEvaluate, XorWithFirstInputFixed) {
  const Circuit c = compile_tree(xor_tree(), kBinary2);
  Circuit r = partial_evaluate(c, {{0, 1}});
  EXPECT_EQ(r.domain().cardinality(), 2);
  for (std::int64_t b = 0; b <= 1; ++b) {
    const std::vector<std::int64_t> x{1, b};
    EXPECT_EQ(value_at(r, r.output(model_output(1)), x), b == 0);
    EXPECT_EQ(value_at(r, r.output(model_output(1)), x), value_at(c, c.output(model_output(1)), x));
  }
  EXPECT_EQ(r.output(model_output(1)), r.make_not(r.feature_bits(1)[0]));
}

TEST(PartialEvaluate, FixAllAndFixNone) {
  testing::Rng rng(9);
  const auto d = testing::random_domain(rng, 10);
  const Circuit c = compile_model(testing::random_network(rng, d, 1, 3));
  const Circuit same = partial_evaluate(c, {});
  std::vector<Wire> roots;
  for (const auto& [name, w] : c.outputs()) roots.push_back(w);
  std::vector<Wire> same_roots;
  for (const auto& [name, w] : same.outputs()) same_roots.push_back(w);
  EXPECT_EQ(same.reachable_gates(same_roots), c.reachable_gates(roots));

  const auto x = testing::random_point(rng, d);
  FixedInputs all;
  for (std::size_t f = 0; f < d.size(); ++f) all[f] = x[f];
  const Circuit fixed = partial_evaluate(c, all);
  const auto sim = c.simulate(x);
  for (const auto& [name, w] : fixed.outputs()) {
    ASSERT_TRUE(fixed.constant_value(w).has_value()) << name;
    EXPECT_EQ(*fixed.constant_value(w), sim[c.output(name).id]) << name;
  }
}

TEST(Simulate, LanesAgreeWithScalar) {
  testing::Rng rng(31);
  const auto d = testing::random_domain(rng, 12);
  const Circuit c = compile_model(testing::random_tree(rng, d, 5, 3));
  std::vector<std::vector<std::int64_t>> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(testing::random_point(rng, d));
  const auto lanes = c.simulate_lanes(c.pack_inputs(batch));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto sim = c.simulate(batch[k]);
    for (std::size_t g = 0; g < c.size(); ++g) ASSERT_EQ(((lanes[g] >> k) & 1) != 0, sim[g]);
  }
}

}  // namespace
}  // namespace exactml
