#include "exactml/circuit.hpp"

#include <algorithm>
#include <sstream>

#include "exactml/error.hpp"

namespace exactml {

namespace {

std::uint64_t key_of(GateKind kind, std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(kind) << 60) | (static_cast<std::uint64_t>(a) << 30) | b;
}

constexpr std::uint32_t kMaxGates = 1u << 30;

}  // namespace

Circuit::Circuit(InputDomain domain) : domain_(std::move(domain)) {
  gates_.push_back({GateKind::constant, 0, 0});
  gates_.push_back({GateKind::constant, 1, 0});
  for (std::uint32_t bit = 0; bit < domain_.total_bits(); ++bit)
    gates_.push_back({GateKind::input, bit, 0});

  // Patterns above hi - lo would be counted as extra inputs.
  std::vector<Wire> ok;
  for (std::size_t f = 0; f < domain_.size(); ++f) {
    const auto& spec = domain_.feature(f);
    const unsigned w = spec.width();
    BigInt span = spec.range() - 1;
    if (span == pow2(w) - 1) continue;
    auto bits = feature_bits(f);
    Wire le = constant(true);
    for (unsigned k = 0; k < w; ++k) {
      Wire nb = make_not(bits[k]);
      le = mpz_tstbit(span.get_mpz_t(), k) ? make_or(nb, le) : make_and(nb, le);
    }
    ok.push_back(le);
  }
  domain_ok_ = make_and(ok);
}

std::vector<Wire> Circuit::feature_bits(std::size_t feature) const {
  std::vector<Wire> bits;
  const std::size_t off = domain_.bit_offset(feature);
  for (unsigned k = 0; k < domain_.feature(feature).width(); ++k) bits.push_back(input(off + k));
  return bits;
}

std::optional<bool> Circuit::constant_value(Wire w) const {
  const Gate& g = gates_.at(w.id);
  if (g.kind != GateKind::constant) return std::nullopt;
  return g.a != 0;
}

Wire Circuit::intern(GateKind kind, std::uint32_t a, std::uint32_t b) {
  const auto key = key_of(kind, a, b);
  if (auto it = table_.find(key); it != table_.end()) return Wire{it->second};
  if (gates_.size() >= kMaxGates) throw std::length_error("circuit exceeds gate limit");
  const auto id = static_cast<std::uint32_t>(gates_.size());
  gates_.push_back({kind, a, b});
  table_.emplace(key, id);
  return Wire{id};
}

bool Circuit::is_negation_of(Wire a, Wire b) const {
  const Gate& ga = gates_[a.id];
  const Gate& gb = gates_[b.id];
  return (ga.kind == GateKind::not_ && ga.a == b.id) || (gb.kind == GateKind::not_ && gb.a == a.id);
}

Wire Circuit::make_not(Wire a) {
  if (auto c = constant_value(a)) return constant(!*c);
  const Gate& g = gates_[a.id];
  if (g.kind == GateKind::not_) return Wire{g.a};
  return intern(GateKind::not_, a.id, 0);
}

Wire Circuit::make_and(Wire a, Wire b) {
  if (auto c = constant_value(a)) return *c ? b : constant(false);
  if (auto c = constant_value(b)) return *c ? a : constant(false);
  if (a == b) return a;
  if (is_negation_of(a, b)) return constant(false);
  if (b < a) std::swap(a, b);
  return intern(GateKind::and_, a.id, b.id);
}

Wire Circuit::make_or(Wire a, Wire b) {
  if (auto c = constant_value(a)) return *c ? constant(true) : b;
  if (auto c = constant_value(b)) return *c ? constant(true) : a;
  if (a == b) return a;
  if (is_negation_of(a, b)) return constant(true);
  if (b < a) std::swap(a, b);
  return intern(GateKind::or_, a.id, b.id);
}

Wire Circuit::make_xor(Wire a, Wire b) {
  if (auto c = constant_value(a)) return *c ? make_not(b) : b;
  if (auto c = constant_value(b)) return *c ? make_not(a) : a;
  if (a == b) return constant(false);
  if (is_negation_of(a, b)) return constant(true);
  if (b < a) std::swap(a, b);
  return intern(GateKind::xor_, a.id, b.id);
}

Wire Circuit::make_mux(Wire sel, Wire when_true, Wire when_false) {
  if (auto c = constant_value(sel)) return *c ? when_true : when_false;
  if (when_true == when_false) return when_true;
  return make_or(make_and(sel, when_true), make_and(make_not(sel), when_false));
}

Wire Circuit::make_and(std::span<const Wire> ws) {
  Wire acc = constant(true);
  for (Wire w : ws) acc = make_and(acc, w);
  return acc;
}

Wire Circuit::make_or(std::span<const Wire> ws) {
  Wire acc = constant(false);
  for (Wire w : ws) acc = make_or(acc, w);
  return acc;
}

void Circuit::set_output(const std::string& name, Wire w) {
  if (w.id >= gates_.size()) throw std::out_of_range("output wire does not exist");
  if (!outputs_.emplace(name, w).second) throw InputError("duplicate circuit output '" + name + "'");
}

Wire Circuit::output(const std::string& name) const {
  auto it = outputs_.find(name);
  if (it == outputs_.end()) throw InputError("circuit has no output named '" + name + "'");
  return it->second;
}

void Circuit::record_bundle(std::string name, Bundle bundle) {
  bundles_.push_back({std::move(name), std::move(bundle)});
}

std::vector<std::uint64_t> Circuit::pack_inputs(std::span<const std::vector<std::int64_t>> inputs) const {
  if (inputs.size() > 64) throw std::invalid_argument("at most 64 inputs per lane pack");
  std::vector<std::uint64_t> words(num_inputs(), 0);
  for (std::size_t lane = 0; lane < inputs.size(); ++lane) {
    const auto& x = inputs[lane];
    domain_.check(x);
    for (std::size_t f = 0; f < domain_.size(); ++f) {
      const auto& spec = domain_.feature(f);
      const auto offset = static_cast<std::uint64_t>(x[f]) - static_cast<std::uint64_t>(spec.lo);
      const std::size_t base = domain_.bit_offset(f);
      for (unsigned k = 0; k < spec.width(); ++k)
        if ((offset >> k) & 1u) words[base + k] |= std::uint64_t{1} << lane;
    }
  }
  return words;
}

std::vector<std::uint64_t> Circuit::simulate_lanes(std::span<const std::uint64_t> input_words) const {
  if (input_words.size() != num_inputs()) throw std::invalid_argument("wrong number of input words");
  std::vector<std::uint64_t> v(gates_.size());
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const Gate& g = gates_[i];
    switch (g.kind) {
      case GateKind::constant: v[i] = g.a ? ~std::uint64_t{0} : 0; break;
      case GateKind::input: v[i] = input_words[g.a]; break;
      case GateKind::not_: v[i] = ~v[g.a]; break;
      case GateKind::and_: v[i] = v[g.a] & v[g.b]; break;
      case GateKind::or_: v[i] = v[g.a] | v[g.b]; break;
      case GateKind::xor_: v[i] = v[g.a] ^ v[g.b]; break;
    }
  }
  return v;
}

std::vector<bool> Circuit::simulate(std::span<const std::int64_t> input) const {
  std::vector<std::vector<std::int64_t>> one{std::vector<std::int64_t>(input.begin(), input.end())};
  auto lanes = simulate_lanes(pack_inputs(one));
  std::vector<bool> out(lanes.size());
  for (std::size_t i = 0; i < lanes.size(); ++i) out[i] = lanes[i] & 1u;
  return out;
}

std::vector<bool> Circuit::reachable_mask(std::span<const Wire> roots) const {
  std::vector<bool> mark(gates_.size(), false);
  for (Wire r : roots) mark.at(r.id) = true;
  for (std::size_t i = gates_.size(); i-- > 0;) {
    if (!mark[i]) continue;
    const Gate& g = gates_[i];
    if (g.kind == GateKind::not_) mark[g.a] = true;
    if (g.kind == GateKind::and_ || g.kind == GateKind::or_ || g.kind == GateKind::xor_) {
      mark[g.a] = true;
      mark[g.b] = true;
    }
  }
  return mark;
}

std::size_t Circuit::reachable_gates(std::span<const Wire> roots) const {
  auto mark = reachable_mask(roots);
  std::size_t n = 0;
  for (std::size_t i = 0; i < gates_.size(); ++i)
    if (mark[i] && gates_[i].kind != GateKind::constant && gates_[i].kind != GateKind::input) ++n;
  return n;
}

std::string Circuit::dump() const {
  std::ostringstream out;
  out << "c circuit inputs=" << num_inputs() << " gates=" << gates_.size() << "\n";
  for (std::size_t f = 0; f < domain_.size(); ++f) {
    auto bits = feature_bits(f);
    for (std::size_t k = 0; k < bits.size(); ++k)
      out << "i " << bits[k].id << " " << domain_.feature(f).name << "." << k << "\n";
  }
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const Gate& g = gates_[i];
    switch (g.kind) {
      case GateKind::constant: out << "g " << i << " const " << g.a << "\n"; break;
      case GateKind::input: break;
      case GateKind::not_: out << "g " << i << " not " << g.a << "\n"; break;
      case GateKind::and_: out << "g " << i << " and " << g.a << " " << g.b << "\n"; break;
      case GateKind::or_: out << "g " << i << " or " << g.a << " " << g.b << "\n"; break;
      case GateKind::xor_: out << "g " << i << " xor " << g.a << " " << g.b << "\n"; break;
    }
  }
  out << "o domain " << domain_ok_.id << "\n";
  for (const auto& [name, w] : outputs_) out << "o " << name << " " << w.id << "\n";
  return out.str();
}

BigInt bundle_value(const Bundle& bundle, const std::vector<bool>& simulation) {
  BigInt v = 0;
  const std::size_t w = bundle.width();
  for (std::size_t k = w; k-- > 0;) {
    v *= 2;
    if (simulation.at(bundle.bits[k].id)) v += 1;
  }
  if (w > 0 && simulation.at(bundle.bits[w - 1].id)) v -= pow2(w);
  return v;
}

}  // namespace exactml
