#include "exactml/compile.hpp"

#include <algorithm>

#include "exactml/error.hpp"

namespace exactml {

std::string model_output(ClassLabel label) { return "model_" + std::to_string(label); }
std::string truth_output(ClassLabel label) { return "truth_" + std::to_string(label); }

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::tp: return "tp";
    case MetricKind::fp: return "fp";
    case MetricKind::tn: return "tn";
    case MetricKind::fn: return "fn";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Bit-vector arithmetic

namespace bits {

namespace {

unsigned bit_length(const BigInt& v) {
  return v == 0 ? 0u : static_cast<unsigned>(mpz_sizeinbase(v.get_mpz_t(), 2));
}

void check_width(std::size_t width, unsigned max_width) {
  if (width > max_width)
    throw WidthOverflow("width overflow: bundle needs " + std::to_string(width) +
                        " bits, limit is " + std::to_string(max_width));
}

Bundle extend_pair(Circuit& c, const Bundle& a, std::size_t width) {
  return a.width() >= width ? a : resize(c, a, width);
}

}  // namespace

unsigned signed_width(const BigInt& lo, const BigInt& hi) {
  auto need = [](const BigInt& v) -> unsigned {
    return v >= 0 ? bit_length(v) + 1 : bit_length(-v - 1) + 1;
  };
  return std::max(need(lo), need(hi));
}

Bundle constant(Circuit& c, const BigInt& value) {
  Bundle b;
  const unsigned w = signed_width(value, value);
  for (unsigned k = 0; k < w; ++k) b.bits.push_back(c.constant(mpz_tstbit(value.get_mpz_t(), k) != 0));
  b.lo = b.hi = value;
  return b;
}

Bundle feature_offset(Circuit& c, std::size_t feature) {
  Bundle b;
  b.bits = c.feature_bits(feature);
  b.bits.push_back(c.constant(false));
  b.lo = 0;
  b.hi = c.domain().feature(feature).range() - 1;
  return b;
}

Bundle feature_value(Circuit& c, std::size_t feature, unsigned max_width) {
  const auto lo = from_int64(c.domain().feature(feature).lo);
  Bundle off = feature_offset(c, feature);
  if (lo == 0) return off;
  return add(c, off, constant(c, lo), false, max_width);
}

Bundle resize(Circuit&, const Bundle& a, std::size_t width) {
  Bundle r = a;
  if (width <= a.width()) {
    r.bits.resize(width);
  } else {
    r.bits.resize(width, a.sign());
  }
  return r;
}

Bundle fit(Circuit& c, const Bundle& a) {
  const unsigned w = signed_width(a.lo, a.hi);
  return w < a.width() ? resize(c, a, w) : a;
}

Bundle add(Circuit& c, const Bundle& a, const Bundle& b, bool subtract, unsigned max_width) {
  Bundle r;
  r.lo = subtract ? BigInt(a.lo - b.hi) : BigInt(a.lo + b.lo);
  r.hi = subtract ? BigInt(a.hi - b.lo) : BigInt(a.hi + b.hi);
  const std::size_t w = signed_width(r.lo, r.hi);
  check_width(w, max_width);
  // Arithmetic is modulo 2^w; the interval guarantees the true sum fits.
  Bundle x = resize(c, a, w);
  Bundle y = resize(c, b, w);
  Wire carry = c.constant(subtract);
  for (std::size_t k = 0; k < w; ++k) {
    Wire yk = subtract ? c.make_not(y.bits[k]) : y.bits[k];
    Wire half = c.make_xor(x.bits[k], yk);
    r.bits.push_back(c.make_xor(half, carry));
    carry = c.make_or(c.make_and(x.bits[k], yk), c.make_and(half, carry));
  }
  return r;
}

Bundle shift_left(Circuit& c, const Bundle& a, unsigned amount, unsigned max_width) {
  if (amount == 0) return a;
  check_width(a.width() + amount, max_width);
  Bundle r;
  r.bits.assign(amount, c.constant(false));
  r.bits.insert(r.bits.end(), a.bits.begin(), a.bits.end());
  r.lo = a.lo * pow2(amount);
  r.hi = a.hi * pow2(amount);
  return r;
}

Bundle shift_right(Circuit& c, const Bundle& a, unsigned amount) {
  if (amount == 0) return a;
  Bundle r;
  if (amount >= a.width()) {
    r.bits = {a.sign()};
  } else {
    r.bits.assign(a.bits.begin() + amount, a.bits.end());
  }
  r.lo = floor_shift(a.lo, amount);
  r.hi = floor_shift(a.hi, amount);
  return fit(c, r);
}

Bundle relu(Circuit& c, const Bundle& a) {
  if (a.lo >= 0) return a;
  if (a.hi <= 0) return constant(c, 0);
  Bundle r;
  Wire keep = c.make_not(a.sign());
  for (std::size_t k = 0; k + 1 < a.width(); ++k) r.bits.push_back(c.make_and(a.bits[k], keep));
  r.bits.push_back(c.constant(false));
  r.lo = 0;
  r.hi = a.hi;
  return fit(c, r);
}

Bundle mux(Circuit& c, Wire sel, const Bundle& when_true, const Bundle& when_false) {
  const std::size_t w = std::max(when_true.width(), when_false.width());
  Bundle t = extend_pair(c, when_true, w);
  Bundle f = extend_pair(c, when_false, w);
  Bundle r;
  for (std::size_t k = 0; k < w; ++k) r.bits.push_back(c.make_mux(sel, t.bits[k], f.bits[k]));
  r.lo = std::min(when_true.lo, when_false.lo);
  r.hi = std::max(when_true.hi, when_false.hi);
  return r;
}

namespace {

struct Term {
  Bundle value;
  bool negative;
};

// Balanced summation of signed terms; each adder is sized by its own interval.
Bundle sum_terms(Circuit& c, std::vector<Term> terms, unsigned max_width) {
  if (terms.empty()) return constant(c, 0);
  while (terms.size() > 1) {
    std::vector<Term> next;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
      const Term& a = terms[i];
      const Term& b = terms[i + 1];
      if (a.negative == b.negative) next.push_back({add(c, a.value, b.value, false, max_width), a.negative});
      else if (a.negative) next.push_back({add(c, b.value, a.value, true, max_width), false});
      else next.push_back({add(c, a.value, b.value, true, max_width), false});
    }
    if (terms.size() % 2) next.push_back(std::move(terms.back()));
    terms = std::move(next);
  }
  if (terms.front().negative) return add(c, constant(c, 0), terms.front().value, true, max_width);
  return terms.front().value;
}

void push_products(Circuit& c, std::vector<Term>& terms, const Bundle& a, const BigInt& factor,
                   unsigned max_width) {
  if (factor == 0 || (a.lo == 0 && a.hi == 0)) return;
  const BigInt mag = abs(factor);
  for (unsigned k = 0; k < bit_length(mag); ++k)
    if (mpz_tstbit(mag.get_mpz_t(), k)) terms.push_back({shift_left(c, a, k, max_width), factor < 0});
}

void push_constant(Circuit& c, std::vector<Term>& terms, const BigInt& value) {
  if (value != 0) terms.push_back({constant(c, abs(value)), value < 0});
}

}  // namespace

Bundle multiply(Circuit& c, const Bundle& a, const BigInt& factor, unsigned max_width) {
  std::vector<Term> terms;
  push_products(c, terms, a, factor, max_width);
  return sum_terms(c, std::move(terms), max_width);
}

Wire signed_greater(Circuit& c, const Bundle& a, const Bundle& b) {
  if (a.lo > b.hi) return c.constant(true);
  if (a.hi <= b.lo) return c.constant(false);
  const std::size_t w = std::max(a.width(), b.width());
  Bundle x = extend_pair(c, a, w);
  Bundle y = extend_pair(c, b, w);
  Wire ugt = c.constant(false);
  for (std::size_t k = 0; k < w; ++k) {
    Wire here = c.make_and(x.bits[k], c.make_not(y.bits[k]));
    ugt = c.make_or(here, c.make_and(c.make_xnor(x.bits[k], y.bits[k]), ugt));
  }
  // Differing signs: a > b exactly when b is the negative one.
  Wire differ = c.make_xor(x.sign(), y.sign());
  return c.make_mux(differ, y.sign(), ugt);
}

Wire equal(Circuit& c, const Bundle& a, const Bundle& b) {
  if (a.lo > b.hi || b.lo > a.hi) return c.constant(false);
  const std::size_t w = std::max(a.width(), b.width());
  Bundle x = extend_pair(c, a, w);
  Bundle y = extend_pair(c, b, w);
  Wire acc = c.constant(true);
  for (std::size_t k = 0; k < w; ++k) acc = c.make_and(acc, c.make_xnor(x.bits[k], y.bits[k]));
  return acc;
}

Wire unsigned_le_const(Circuit& c, std::span<const Wire> bits, const BigInt& constant) {
  if (constant < 0) return c.constant(false);
  if (constant >= pow2(bits.size()) - 1) return c.constant(true);
  Wire r = c.constant(true);
  for (std::size_t k = 0; k < bits.size(); ++k) {
    Wire nb = c.make_not(bits[k]);
    r = mpz_tstbit(constant.get_mpz_t(), k) ? c.make_or(nb, r) : c.make_and(nb, r);
  }
  return r;
}

}  // namespace bits

// ---------------------------------------------------------------------------
// Feature comparisons

namespace {

Wire feature_le(Circuit& c, std::size_t f, const BigInt& threshold) {
  const auto& spec = c.domain().feature(f);
  const BigInt lo = from_int64(spec.lo);
  if (threshold < lo) return c.constant(false);
  if (threshold >= from_int64(spec.hi)) return c.constant(true);
  auto fb = c.feature_bits(f);
  return bits::unsigned_le_const(c, fb, threshold - lo);
}

Wire feature_eq(Circuit& c, std::size_t f, const BigInt& value) {
  const auto& spec = c.domain().feature(f);
  if (value < from_int64(spec.lo) || value > from_int64(spec.hi)) return c.constant(false);
  const BigInt off = value - from_int64(spec.lo);
  auto fb = c.feature_bits(f);
  Wire acc = c.constant(true);
  for (std::size_t k = 0; k < fb.size(); ++k)
    acc = c.make_and(acc, mpz_tstbit(off.get_mpz_t(), k) ? fb[k] : c.make_not(fb[k]));
  return acc;
}

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::le: return CmpOp::ge;
    case CmpOp::lt: return CmpOp::gt;
    case CmpOp::ge: return CmpOp::le;
    case CmpOp::gt: return CmpOp::lt;
    default: return op;
  }
}

Wire compare(Circuit& c, Operand lhs, CmpOp op, Operand rhs) {
  if (!lhs.is_feature && !rhs.is_feature)
    return c.constant(Predicate::compare(lhs, op, rhs).constant_value());
  if (!lhs.is_feature) {
    std::swap(lhs, rhs);
    op = flip(op);
  }
  if (!rhs.is_feature) {
    const BigInt k = from_int64(rhs.constant);
    const std::size_t f = lhs.feature;
    switch (op) {
      case CmpOp::le: return feature_le(c, f, k);
      case CmpOp::lt: return feature_le(c, f, k - 1);
      case CmpOp::ge: return c.make_not(feature_le(c, f, k - 1));
      case CmpOp::gt: return c.make_not(feature_le(c, f, k));
      case CmpOp::eq: return feature_eq(c, f, k);
      case CmpOp::ne: return c.make_not(feature_eq(c, f, k));
    }
  }
  const Bundle a = bits::feature_value(c, lhs.feature);
  const Bundle b = bits::feature_value(c, rhs.feature);
  switch (op) {
    case CmpOp::le: return c.make_not(bits::signed_greater(c, a, b));
    case CmpOp::lt: return bits::signed_greater(c, b, a);
    case CmpOp::ge: return c.make_not(bits::signed_greater(c, b, a));
    case CmpOp::gt: return bits::signed_greater(c, a, b);
    case CmpOp::eq: return bits::equal(c, a, b);
    case CmpOp::ne: return c.make_not(bits::equal(c, a, b));
  }
  return c.constant(false);
}

void require_same_domain(const Circuit& c, const InputDomain& d) {
  if (!(c.domain() == d)) throw InputError("model domain does not match the circuit domain");
}

void compile_tree_outputs(Circuit& c, const DecisionTree& tree) {
  require_same_domain(c, tree.domain());
  std::vector<Wire> label_wires(static_cast<std::size_t>(tree.num_labels()), c.constant(false));
  std::vector<std::pair<std::size_t, Wire>> stack{{tree.root(), c.constant(true)}};
  while (!stack.empty()) {
    auto [n, path] = stack.back();
    stack.pop_back();
    const auto& node = tree.nodes()[n];
    if (const auto* leaf = std::get_if<TreeLeaf>(&node)) {
      auto& acc = label_wires[static_cast<std::size_t>(leaf->label)];
      acc = c.make_or(acc, path);
      continue;
    }
    const auto& split = std::get<TreeSplit>(node);
    Wire go_left = feature_le(c, split.feature, from_int64(split.threshold));
    stack.push_back({split.right, c.make_and(path, c.make_not(go_left))});
    stack.push_back({split.left, c.make_and(path, go_left)});
  }
  for (std::size_t l = 0; l < label_wires.size(); ++l)
    c.set_output(model_output(static_cast<ClassLabel>(l)), label_wires[l]);
}

struct Contender {
  Bundle value;
  std::vector<Wire> one_hot;
};

void compile_network_outputs(Circuit& c, const QuantizedNetwork& net, const CompileOptions& opt) {
  require_same_domain(c, net.domain());
  const auto& domain = c.domain();
  std::vector<Bundle> acts;
  for (std::size_t f = 0; f < domain.size(); ++f) acts.push_back(bits::feature_offset(c, f));

  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    std::vector<Bundle> next;
    for (std::size_t i = 0; i < layer.outputs(); ++i) {
      std::vector<bits::Term> terms;
      BigInt bias = from_int64(layer.biases[i]);
      for (std::size_t j = 0; j < layer.inputs(); ++j) {
        const BigInt w = from_int64(layer.weights[i][j]);
        // Layer 0 sees offset inputs; the feature minimum moves into the bias.
        if (l == 0) bias += w * from_int64(domain.feature(j).lo);
        bits::push_products(c, terms, acts[j], w, opt.max_width);
      }
      bits::push_constant(c, terms, bias);
      const std::string prefix = "layer" + std::to_string(l) + ".n" + std::to_string(i);
      Bundle z = bits::fit(c, bits::sum_terms(c, std::move(terms), opt.max_width));
      c.record_bundle(prefix + ".affine", z);
      Bundle s = bits::shift_right(c, z, layer.post_shift);
      c.record_bundle(prefix + ".shifted", s);
      Bundle y = layer.activation == Activation::relu ? bits::relu(c, s) : s;
      c.record_bundle(prefix + ".out", y);
      next.push_back(std::move(y));
    }
    acts = std::move(next);
  }

  // Tournament argmax; the left (lower-index) side wins ties.
  std::vector<Contender> round;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    Contender k{acts[i], std::vector<Wire>(acts.size(), c.constant(false))};
    k.one_hot[i] = c.constant(true);
    round.push_back(std::move(k));
  }
  int level = 0;
  while (round.size() > 1) {
    std::vector<Contender> next;
    for (std::size_t i = 0; i + 1 < round.size(); i += 2) {
      const Contender& left = round[i];
      const Contender& right = round[i + 1];
      Wire right_wins = bits::signed_greater(c, right.value, left.value);
      Contender m;
      m.value = bits::mux(c, right_wins, right.value, left.value);
      m.value.lo = std::max(left.value.lo, right.value.lo);
      m.value.hi = std::max(left.value.hi, right.value.hi);
      m.one_hot.resize(acts.size());
      for (std::size_t k = 0; k < acts.size(); ++k)
        m.one_hot[k] = c.make_or(c.make_and(right_wins, right.one_hot[k]),
                                 c.make_and(c.make_not(right_wins), left.one_hot[k]));
      c.record_bundle("argmax.r" + std::to_string(level) + "." + std::to_string(i / 2), m.value);
      next.push_back(std::move(m));
    }
    if (round.size() % 2) next.push_back(std::move(round.back()));
    round = std::move(next);
    ++level;
  }
  for (std::size_t k = 0; k < acts.size(); ++k)
    c.set_output(model_output(static_cast<ClassLabel>(k)), round.front().one_hot[k]);
}

}  // namespace

void compile_model_into(Circuit& circuit, const Model& model, const CompileOptions& options) {
  if (const auto* tree = std::get_if<DecisionTree>(&model)) compile_tree_outputs(circuit, *tree);
  else compile_network_outputs(circuit, std::get<QuantizedNetwork>(model), options);
}

Circuit compile_tree(const DecisionTree& tree, const InputDomain& domain) {
  Circuit c(domain);
  compile_tree_outputs(c, tree);
  return c;
}

Circuit compile_network(const QuantizedNetwork& net, const InputDomain& domain,
                        const CompileOptions& options) {
  Circuit c(domain);
  compile_network_outputs(c, net, options);
  return c;
}

Circuit compile_model(const Model& model, const CompileOptions& options) {
  Circuit c(model_domain(model));
  compile_model_into(c, model, options);
  return c;
}

Wire compile_predicate(Circuit& c, const Predicate& pred) {
  switch (pred.kind()) {
    case Predicate::Kind::constant: return c.constant(pred.constant_value());
    case Predicate::Kind::compare: return compare(c, pred.lhs(), pred.op(), pred.rhs());
    case Predicate::Kind::negation: return c.make_not(compile_predicate(c, pred.children().front()));
    case Predicate::Kind::conjunction: {
      Wire acc = c.constant(true);
      for (const auto& ch : pred.children()) acc = c.make_and(acc, compile_predicate(c, ch));
      return acc;
    }
    case Predicate::Kind::disjunction: {
      Wire acc = c.constant(false);
      for (const auto& ch : pred.children()) acc = c.make_or(acc, compile_predicate(c, ch));
      return acc;
    }
  }
  return c.constant(false);
}

void compile_truth_into(Circuit& circuit, std::span<const Predicate> truth) {
  for (std::size_t l = 0; l < truth.size(); ++l)
    circuit.set_output(truth_output(static_cast<ClassLabel>(l)), compile_predicate(circuit, truth[l]));
}

std::string count_key(ClassLabel label, MetricKind kind) {
  return "label_" + std::to_string(label) + "." + std::string(metric_name(kind));
}

Wire compose_metric(Circuit& c, ClassLabel label, MetricKind kind) {
  const Wire model = c.output(model_output(label));
  const Wire truth = c.output(truth_output(label));
  switch (kind) {
    case MetricKind::tp: return c.make_and(truth, model);
    case MetricKind::fp: return c.make_and(c.make_not(truth), model);
    case MetricKind::tn: return c.make_and(c.make_not(truth), c.make_not(model));
    case MetricKind::fn: return c.make_and(truth, c.make_not(model));
  }
  return c.constant(false);
}

Wire constrain_region(Circuit& c, Wire root, const RobustnessRegion& region) {
  if (region.intervals.size() != c.domain().size())
    throw InputError("region dimension does not match the circuit domain");
  if (region.size == 0) throw InputError("empty region");
  Wire acc = root;
  for (std::size_t f = 0; f < region.intervals.size(); ++f) {
    const auto [lo, hi] = region.intervals[f];
    if (lo > hi) throw InputError("empty region");
    acc = c.make_and(acc, feature_le(c, f, from_int64(hi)));
    acc = c.make_and(acc, c.make_not(feature_le(c, f, from_int64(lo) - 1)));
  }
  return acc;
}

Circuit partial_evaluate(const Circuit& circuit, const FixedInputs& fixed) {
  const InputDomain& old_domain = circuit.domain();
  Circuit out(old_domain.restrict(fixed));

  std::vector<Wire> map(circuit.size(), Wire{0});
  map[0] = out.constant(false);
  map[1] = out.constant(true);
  for (std::size_t f = 0; f < old_domain.size(); ++f) {
    const auto old_bits = circuit.feature_bits(f);
    auto it = fixed.find(f);
    if (it == fixed.end()) {
      const auto new_bits = out.feature_bits(f);
      for (std::size_t k = 0; k < old_bits.size(); ++k) map[old_bits[k].id] = new_bits[k];
      continue;
    }
    const auto offset = static_cast<std::uint64_t>(it->second) -
                        static_cast<std::uint64_t>(old_domain.feature(f).lo);
    for (std::size_t k = 0; k < old_bits.size(); ++k)
      map[old_bits[k].id] = out.constant(((offset >> k) & 1u) != 0);
  }

  std::vector<Wire> roots;
  for (const auto& [name, w] : circuit.outputs()) roots.push_back(w);
  const auto live = circuit.reachable_mask(roots);
  for (std::uint32_t i = 0; i < circuit.size(); ++i) {
    if (!live[i]) continue;
    const Gate& g = circuit.gate(Wire{i});
    switch (g.kind) {
      case GateKind::constant:
      case GateKind::input: break;
      case GateKind::not_: map[i] = out.make_not(map[g.a]); break;
      case GateKind::and_: map[i] = out.make_and(map[g.a], map[g.b]); break;
      case GateKind::or_: map[i] = out.make_or(map[g.a], map[g.b]); break;
      case GateKind::xor_: map[i] = out.make_xor(map[g.a], map[g.b]); break;
    }
  }
  for (const auto& [name, w] : circuit.outputs()) out.set_output(name, map[w.id]);
  return out;
}

}  // namespace exactml
