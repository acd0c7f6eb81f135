#include "exactml/model.hpp"

#include <algorithm>

#include "exactml/error.hpp"
#include "json_util.hpp"

namespace exactml {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t root, int num_labels,
                           InputDomain domain)
    : nodes_(std::move(nodes)), root_(root), num_labels_(num_labels), domain_(std::move(domain)) {
  if (num_labels_ < 1) throw InputError("tree needs num_labels >= 1");
  if (nodes_.empty()) throw InputError("tree has no nodes");
  if (root_ >= nodes_.size()) throw InputError("root index out of range");

  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (const auto* leaf = std::get_if<TreeLeaf>(&nodes_[i])) {
      if (leaf->label < 0 || leaf->label >= num_labels_)
        throw InputError("node " + std::to_string(i) + ": label " + std::to_string(leaf->label) +
                         " is not below num_labels " + std::to_string(num_labels_));
      continue;
    }
    const auto& split = std::get<TreeSplit>(nodes_[i]);
    if (split.feature >= domain_.size())
      throw InputError("node " + std::to_string(i) + ": feature index " +
                       std::to_string(split.feature) + " out of range");
    for (std::size_t child : {split.left, split.right}) {
      if (child >= nodes_.size())
        throw InputError("node " + std::to_string(i) + ": child index out of range");
      if (child == i) throw InputError("node " + std::to_string(i) + ": cycle (node is its own child)");
      ++parents[child];
    }
  }
  if (parents[root_] != 0) throw InputError("cycle: root has a parent");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i != root_ && parents[i] != 1)
      throw InputError("node " + std::to_string(i) + " has " + std::to_string(parents[i]) +
                       " parents; a tree needs exactly one");
  }
  // One parent each, yet a detached loop is still possible.
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::size_t> stack{root_};
  std::size_t visited = 0;
  while (!stack.empty()) {
    std::size_t n = stack.back();
    stack.pop_back();
    if (seen[n]) throw InputError("cycle through node " + std::to_string(n));
    seen[n] = true;
    ++visited;
    if (const auto* split = std::get_if<TreeSplit>(&nodes_[n])) {
      stack.push_back(split->right);
      stack.push_back(split->left);
    }
  }
  if (visited != nodes_.size()) throw InputError("cycle: nodes unreachable from the root");
}

ClassLabel DecisionTree::eval(std::span<const std::int64_t> input) const {
  domain_.check(input);
  std::size_t n = root_;
  while (const auto* split = std::get_if<TreeSplit>(&nodes_[n]))
    n = input[split->feature] <= split->threshold ? split->left : split->right;
  return std::get<TreeLeaf>(nodes_[n]).label;
}

QuantizedNetwork::QuantizedNetwork(std::vector<DenseLayer> layers, InputDomain domain)
    : layers_(std::move(layers)), domain_(std::move(domain)) {
  if (layers_.empty()) throw InputError("network has no layers");
  std::size_t width = domain_.size();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.outputs() == 0) throw InputError(where + " has no neurons");
    for (const auto& row : layer.weights)
      if (row.size() != width)
        throw InputError(where + ": dimension mismatch (expects " + std::to_string(row.size()) +
                         " inputs, previous layer produces " + std::to_string(width) + ")");
    if (layer.biases.size() != layer.outputs())
      throw InputError(where + ": dimension mismatch (" + std::to_string(layer.biases.size()) +
                       " biases for " + std::to_string(layer.outputs()) + " neurons)");
    width = layer.outputs();
  }
  if (layers_.back().activation != Activation::none)
    throw InputError("final layer must have activation 'none' (raw logits)");
}

std::vector<LayerTrace> QuantizedNetwork::trace(std::span<const std::int64_t> input) const {
  domain_.check(input);
  std::vector<BigInt> a;
  a.reserve(input.size());
  for (auto v : input) a.push_back(from_int64(v));
  std::vector<LayerTrace> out;
  out.reserve(layers_.size());
  for (const auto& layer : layers_) {
    LayerTrace t;
    for (std::size_t i = 0; i < layer.outputs(); ++i) {
      BigInt z = from_int64(layer.biases[i]);
      for (std::size_t j = 0; j < a.size(); ++j) z += from_int64(layer.weights[i][j]) * a[j];
      BigInt s = floor_shift(z, layer.post_shift);
      BigInt y = (layer.activation == Activation::relu && s < 0) ? BigInt(0) : s;
      t.affine.push_back(std::move(z));
      t.shifted.push_back(std::move(s));
      t.output.push_back(std::move(y));
    }
    a = t.output;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<BigInt> QuantizedNetwork::logits(std::span<const std::int64_t> input) const {
  return trace(input).back().output;
}

ClassLabel QuantizedNetwork::eval(std::span<const std::int64_t> input) const {
  auto z = logits(input);
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i)
    if (z[i] > z[best]) best = i;
  return static_cast<ClassLabel>(best);
}

ClassLabel evaluate(const Model& model, std::span<const std::int64_t> input) {
  return std::visit([&](const auto& m) { return m.eval(input); }, model);
}

int num_labels(const Model& model) {
  return std::visit([](const auto& m) { return m.num_labels(); }, model);
}

const InputDomain& model_domain(const Model& model) {
  return std::visit([](const auto& m) -> const InputDomain& { return m.domain(); }, model);
}

namespace {

std::size_t feature_ref(const nlohmann::json& v, const InputDomain& domain, std::size_t node) {
  if (v.is_string()) {
    std::size_t index = domain.find(v.get<std::string>());
    if (index == InputDomain::npos)
      throw InputError("node " + std::to_string(node) + ": unknown feature '" +
                       v.get<std::string>() + "'");
    return index;
  }
  auto index = detail::get_int<long long>(v, "node " + std::to_string(node) + " feature");
  if (index < 0 || static_cast<std::size_t>(index) >= domain.size())
    throw InputError("node " + std::to_string(node) + ": feature index " + std::to_string(index) +
                     " out of range");
  return static_cast<std::size_t>(index);
}

std::size_t child_ref(const nlohmann::json& node, const char* key, std::size_t i) {
  if (!node.contains(key)) throw InputError("node " + std::to_string(i) + " lacks '" + key + "'");
  auto v = detail::get_int<long long>(node.at(key), "node " + std::to_string(i) + " " + key);
  if (v < 0) throw InputError("node " + std::to_string(i) + ": negative child index");
  return static_cast<std::size_t>(v);
}

void expect_type(const nlohmann::json& doc, const char* type) {
  if (!doc.contains("type") || doc.at("type") != type)
    throw InputError(std::string("expected a document of type '") + type + "'");
}

}  // namespace

DecisionTree load_tree(const nlohmann::json& doc, const InputDomain& domain) {
  detail::expect_format_version(doc, "tree");
  expect_type(doc, "decision_tree");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array())
    throw InputError("tree document needs a 'nodes' array");
  int num_labels = detail::get_int<int>(doc.value("num_labels", nlohmann::json(2)), "num_labels");
  std::size_t root = 0;
  if (doc.contains("root")) root = static_cast<std::size_t>(detail::get_int<long long>(doc.at("root"), "root"));
  std::vector<TreeNode> nodes;
  const auto& list = doc.at("nodes");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& n = list[i];
    if (!n.is_object()) throw InputError("node " + std::to_string(i) + " must be an object");
    if (n.contains("label")) {
      nodes.push_back(TreeLeaf{detail::get_int<int>(n.at("label"), "node " + std::to_string(i) + " label")});
      continue;
    }
    if (!n.contains("feature") || !n.contains("threshold"))
      throw InputError("node " + std::to_string(i) + " is neither a leaf nor a split");
    TreeSplit split;
    split.feature = feature_ref(n.at("feature"), domain, i);
    split.threshold = detail::get_int<std::int64_t>(n.at("threshold"), "node " + std::to_string(i) + " threshold");
    split.left = child_ref(n, "left", i);
    split.right = child_ref(n, "right", i);
    nodes.push_back(split);
  }
  return DecisionTree(std::move(nodes), root, num_labels, domain);
}

QuantizedNetwork load_network(const nlohmann::json& doc, const InputDomain& domain) {
  detail::expect_format_version(doc, "network");
  expect_type(doc, "quantized_network");
  if (doc.contains("input_width")) {
    auto w = detail::get_int<long long>(doc.at("input_width"), "input_width");
    if (w < 0 || static_cast<std::size_t>(w) != domain.size())
      throw InputError("network input_width " + std::to_string(w) + " does not match the " +
                       std::to_string(domain.size()) + "-feature domain");
  }
  if (!doc.contains("layers") || !doc.at("layers").is_array())
    throw InputError("network document needs a 'layers' array");
  std::vector<DenseLayer> layers;
  const auto& list = doc.at("layers");
  for (std::size_t l = 0; l < list.size(); ++l) {
    const auto& j = list[l];
    const std::string where = "layer " + std::to_string(l);
    DenseLayer layer;
    if (!j.contains("weights") || !j.at("weights").is_array())
      throw InputError(where + " needs a 'weights' matrix");
    for (const auto& row : j.at("weights")) {
      if (!row.is_array()) throw InputError(where + ": weight rows must be arrays");
      auto& out = layer.weights.emplace_back();
      for (const auto& w : row) out.push_back(detail::get_int<std::int64_t>(w, where + " weight"));
    }
    if (j.contains("biases")) {
      for (const auto& b : j.at("biases"))
        layer.biases.push_back(detail::get_int<std::int64_t>(b, where + " bias"));
    } else {
      layer.biases.assign(layer.weights.size(), 0);
    }
    std::string act = j.value("activation", std::string("none"));
    if (act == "relu") layer.activation = Activation::relu;
    else if (act == "none") layer.activation = Activation::none;
    else throw InputError(where + ": unknown activation '" + act + "'");
    layer.post_shift = detail::get_int<unsigned>(j.value("post_shift", nlohmann::json(0)), where + " post_shift");
    layers.push_back(std::move(layer));
  }
  return QuantizedNetwork(std::move(layers), domain);
}

Model load_model(const nlohmann::json& doc, const InputDomain& domain) {
  if (!doc.is_object() || !doc.contains("type") || !doc.at("type").is_string())
    throw InputError("model document lacks a 'type' field");
  const auto type = doc.at("type").get<std::string>();
  if (type == "decision_tree") return load_tree(doc, domain);
  if (type == "quantized_network") return load_network(doc, domain);
  throw InputError("unknown model type '" + type + "'");
}

Model load_model(std::string_view text, const InputDomain& domain) {
  return load_model(detail::parse_json(text, "model"), domain);
}

nlohmann::ordered_json emit_tree(const DecisionTree& tree) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& node : tree.nodes()) {
    if (const auto* leaf = std::get_if<TreeLeaf>(&node)) {
      nodes.push_back({{"label", leaf->label}});
    } else {
      const auto& s = std::get<TreeSplit>(node);
      nodes.push_back({{"feature", s.feature}, {"threshold", s.threshold}, {"left", s.left}, {"right", s.right}});
    }
  }
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["type"] = "decision_tree";
  doc["num_labels"] = tree.num_labels();
  doc["root"] = tree.root();
  doc["nodes"] = std::move(nodes);
  return doc;
}

nlohmann::ordered_json emit_network(const QuantizedNetwork& net) {
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::ordered_json j;
    j["weights"] = layer.weights;
    j["biases"] = layer.biases;
    j["activation"] = layer.activation == Activation::relu ? "relu" : "none";
    j["post_shift"] = layer.post_shift;
    layers.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["type"] = "quantized_network";
  doc["input_width"] = net.input_width();
  doc["layers"] = std::move(layers);
  return doc;
}

nlohmann::ordered_json emit_model(const Model& model) {
  if (const auto* tree = std::get_if<DecisionTree>(&model)) return emit_tree(*tree);
  return emit_network(std::get<QuantizedNetwork>(model));
}

}  // namespace exactml
