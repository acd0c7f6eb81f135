#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "exactml/domain.hpp"
#include "exactml/model.hpp"
#include "exactml/predicate.hpp"

namespace exactml::testing {

// Adjacency-bitmask semantics of the builtin graph properties, written
// without the predicate module: bit i*n+j is edge (i, j).
inline bool graph_holds(GraphProperty p, int n, std::uint64_t m) {
  auto e = [&](int i, int j) { return ((m >> (i * n + j)) & 1) != 0; };
  auto reflexive = [&] {
    for (int i = 0; i < n; ++i)
      if (!e(i, i)) return false;
    return true;
  };
  auto irreflexive = [&] {
    for (int i = 0; i < n; ++i)
      if (e(i, i)) return false;
    return true;
  };
  auto symmetric = [&] {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (e(i, j) && !e(j, i)) return false;
    return true;
  };
  auto antisymmetric = [&] {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && e(i, j) && e(j, i)) return false;
    return true;
  };
  auto transitive = [&] {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (e(i, j) && e(j, k) && !e(i, k)) return false;
    return true;
  };
  auto connex = [&] {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && !e(i, j) && !e(j, i)) return false;
    return true;
  };
  switch (p) {
    case GraphProperty::antisymmetric: return antisymmetric();
    case GraphProperty::connex: return connex();
    case GraphProperty::equivalence: return reflexive() && symmetric() && transitive();
    case GraphProperty::irreflexive: return irreflexive();
    case GraphProperty::non_strict_order:
    case GraphProperty::partial_order: return reflexive() && antisymmetric() && transitive();
    case GraphProperty::pre_order: return reflexive() && transitive();
    case GraphProperty::reflexive: return reflexive();
    case GraphProperty::strict_order: return irreflexive() && transitive();
    case GraphProperty::total_order: return reflexive() && antisymmetric() && transitive() && connex();
    case GraphProperty::transitive: return transitive();
  }
  return false;
}

inline std::uint64_t graph_count(GraphProperty p, int n) {
  std::uint64_t c = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << (n * n)); ++m) c += graph_holds(p, n, m) ? 1 : 0;
  return c;
}

inline std::vector<std::int64_t> graph_input(int n, std::uint64_t m) {
  std::vector<std::int64_t> x(static_cast<std::size_t>(n * n));
  for (std::size_t b = 0; b < x.size(); ++b) x[b] = static_cast<std::int64_t>((m >> b) & 1);
  return x;
}

using Rng = std::mt19937_64;

inline std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// Features with mixed widths and signed ranges, total bits <= max_bits.
inline InputDomain random_domain(Rng& rng, unsigned max_bits, std::size_t max_features = 6) {
  std::vector<FeatureSpec> fs;
  unsigned bits = 0;
  while (fs.size() < max_features) {
    const std::int64_t range = uniform(rng, 2, 12);
    FeatureSpec f{"x" + std::to_string(fs.size()), 0, 0};
    f.lo = uniform(rng, -4, 4);
    f.hi = f.lo + range - 1;
    if (bits + f.width() > max_bits) break;
    bits += f.width();
    fs.push_back(f);
  }
  if (fs.empty()) fs.push_back({"x0", 0, 1});
  return InputDomain(std::move(fs));
}

inline std::vector<std::int64_t> random_point(Rng& rng, const InputDomain& d) {
  std::vector<std::int64_t> x(d.size());
  for (std::size_t f = 0; f < d.size(); ++f) x[f] = uniform(rng, d.feature(f).lo, d.feature(f).hi);
  return x;
}

inline DecisionTree random_tree(Rng& rng, const InputDomain& d, int max_depth, int labels) {
  std::vector<TreeNode> nodes;
  auto grow = [&](auto&& self, int depth) -> std::size_t {
    const std::size_t id = nodes.size();
    if (depth == max_depth || (depth > 0 && uniform(rng, 0, 4) == 0)) {
      nodes.emplace_back(TreeLeaf{static_cast<ClassLabel>(uniform(rng, 0, labels - 1))});
      return id;
    }
    nodes.emplace_back(TreeLeaf{});
    TreeSplit s;
    s.feature = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(d.size()) - 1));
    const auto& f = d.feature(s.feature);
    // Occasionally out of range, so constant folding of splits is exercised.
    s.threshold = uniform(rng, f.lo - 1, f.hi);
    s.left = self(self, depth + 1);
    s.right = self(self, depth + 1);
    nodes[id] = s;
    return id;
  };
  grow(grow, 0);
  return DecisionTree(std::move(nodes), 0, labels, d);
}

inline QuantizedNetwork random_network(Rng& rng, const InputDomain& d, int hidden_layers, int labels) {
  std::vector<DenseLayer> layers;
  std::size_t width = d.size();
  for (int l = 0; l <= hidden_layers; ++l) {
    const bool last = l == hidden_layers;
    const std::size_t outs = last ? static_cast<std::size_t>(labels) : static_cast<std::size_t>(uniform(rng, 1, 4));
    DenseLayer layer;
    layer.weights.assign(outs, std::vector<std::int64_t>(width));
    for (auto& row : layer.weights)
      for (auto& w : row) w = uniform(rng, -5, 5);
    layer.biases.resize(outs);
    for (auto& b : layer.biases) b = uniform(rng, -8, 8);
    layer.activation = last ? Activation::none : Activation::relu;
    layer.post_shift = static_cast<unsigned>(uniform(rng, 0, 2));
    layers.push_back(std::move(layer));
    width = outs;
  }
  return QuantizedNetwork(std::move(layers), d);
}

// Truth predicates, one per label, drawn as random comparisons so they
// disagree with the model on some inputs.
inline std::vector<Predicate> random_truth(Rng& rng, const InputDomain& d, int labels) {
  std::vector<Predicate> out;
  for (int l = 0; l < labels; ++l) {
    std::vector<Predicate> parts;
    const int k = static_cast<int>(uniform(rng, 1, 3));
    for (int i = 0; i < k; ++i) {
      const auto f = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(d.size()) - 1));
      const auto op = static_cast<CmpOp>(uniform(rng, 0, 5));
      Operand rhs = uniform(rng, 0, 2) == 0 && d.size() > 1
                        ? Operand::of_feature(static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(d.size()) - 1)))
                        : Operand::of_constant(uniform(rng, d.feature(f).lo, d.feature(f).hi));
      parts.push_back(Predicate::compare(Operand::of_feature(f), op, rhs));
    }
    out.push_back(uniform(rng, 0, 1) ? Predicate::all_of(parts) : Predicate::any_of(parts));
  }
  return out;
}

}  // namespace exactml::testing
