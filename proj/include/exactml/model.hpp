#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "exactml/bigint.hpp"
#include "exactml/domain.hpp"

namespace exactml {

// Index of an output class, in [0, num_labels).
using ClassLabel = int;

// Go left iff input[feature] <= threshold.
struct TreeSplit {
  std::size_t feature = 0;
  std::int64_t threshold = 0;
  std::size_t left = 0;
  std::size_t right = 0;
};

struct TreeLeaf {
  ClassLabel label = 0;
};

using TreeNode = std::variant<TreeSplit, TreeLeaf>;

class DecisionTree {
 public:
  // Validates the node graph and binds the tree to `domain`; throws InputError.
  DecisionTree(std::vector<TreeNode> nodes, std::size_t root, int num_labels, InputDomain domain);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }
  int num_labels() const { return num_labels_; }
  const InputDomain& domain() const { return domain_; }

  ClassLabel eval(std::span<const std::int64_t> input) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t root_;
  int num_labels_;
  InputDomain domain_;
};

enum class Activation { none, relu };

// z = W a + b; out = act(floor(z / 2^post_shift)).
struct DenseLayer {
  std::vector<std::vector<std::int64_t>> weights;  // [outputs][inputs]
  std::vector<std::int64_t> biases;
  Activation activation = Activation::none;
  unsigned post_shift = 0;

  std::size_t outputs() const { return weights.size(); }
  std::size_t inputs() const { return weights.empty() ? 0 : weights.front().size(); }
};

// Exact per-layer values, used to cross-check the compiled arithmetic.
struct LayerTrace {
  std::vector<BigInt> affine;
  std::vector<BigInt> shifted;
  std::vector<BigInt> output;
};

class QuantizedNetwork {
 public:
  QuantizedNetwork(std::vector<DenseLayer> layers, InputDomain domain);

  std::size_t input_width() const { return domain_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  int num_labels() const { return static_cast<int>(layers_.back().outputs()); }
  const InputDomain& domain() const { return domain_; }

  std::vector<BigInt> logits(std::span<const std::int64_t> input) const;
  std::vector<LayerTrace> trace(std::span<const std::int64_t> input) const;
  // Smallest index attaining the maximum logit.
  ClassLabel eval(std::span<const std::int64_t> input) const;

 private:
  std::vector<DenseLayer> layers_;
  InputDomain domain_;
};

using Model = std::variant<DecisionTree, QuantizedNetwork>;

ClassLabel evaluate(const Model& model, std::span<const std::int64_t> input);
int num_labels(const Model& model);
const InputDomain& model_domain(const Model& model);

DecisionTree load_tree(const nlohmann::json& document, const InputDomain& domain);
QuantizedNetwork load_network(const nlohmann::json& document, const InputDomain& domain);
// Dispatches on the document's "type" field.
Model load_model(const nlohmann::json& document, const InputDomain& domain);
Model load_model(std::string_view text, const InputDomain& domain);

nlohmann::ordered_json emit_tree(const DecisionTree& tree);
nlohmann::ordered_json emit_network(const QuantizedNetwork& net);
nlohmann::ordered_json emit_model(const Model& model);

}  // namespace exactml
