#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "exactml/bigint.hpp"
#include "exactml/domain.hpp"

namespace exactml {

struct Wire {
  std::uint32_t id = 0;
  friend auto operator<=>(Wire, Wire) = default;
};

enum class GateKind : std::uint8_t { constant, input, not_, and_, or_, xor_ };

// constant: a = value; input: a = input bit index; not: a; binary: a, b.
struct Gate {
  GateKind kind = GateKind::constant;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

// Two's-complement bundle (low bit first) whose value is known to lie in [lo, hi].
struct Bundle {
  std::vector<Wire> bits;
  BigInt lo;
  BigInt hi;

  std::size_t width() const { return bits.size(); }
  Wire sign() const { return bits.back(); }
};

struct BundleRecord {
  std::string name;
  Bundle bundle;
};

// Gate-level circuit over the bits of an InputDomain. Gates are created in
// topological order, identical (op, operands) pairs are shared, and constant
// and trivial operands are folded at construction time.
class Circuit {
 public:
  explicit Circuit(InputDomain domain);

  const InputDomain& domain() const { return domain_; }
  std::size_t num_inputs() const { return domain_.total_bits(); }
  Wire input(std::size_t bit) const { return Wire{static_cast<std::uint32_t>(2 + bit)}; }
  // Offset-binary bits of a feature, low bit first.
  std::vector<Wire> feature_bits(std::size_t feature) const;

  Wire constant(bool value) const { return Wire{value ? 1u : 0u}; }
  std::optional<bool> constant_value(Wire w) const;

  Wire make_not(Wire a);
  Wire make_and(Wire a, Wire b);
  Wire make_or(Wire a, Wire b);
  Wire make_xor(Wire a, Wire b);
  Wire make_xnor(Wire a, Wire b) { return make_not(make_xor(a, b)); }
  Wire make_mux(Wire sel, Wire when_true, Wire when_false);
  Wire make_and(std::span<const Wire> ws);
  Wire make_or(std::span<const Wire> ws);

  const Gate& gate(Wire w) const { return gates_.at(w.id); }
  std::size_t size() const { return gates_.size(); }

  // True iff every feature's offset pattern is at most hi - lo.
  Wire domain_constraint() const { return domain_ok_; }

  void set_output(const std::string& name, Wire w);
  bool has_output(const std::string& name) const { return outputs_.count(name) != 0; }
  Wire output(const std::string& name) const;
  const std::map<std::string, Wire>& outputs() const { return outputs_; }

  void record_bundle(std::string name, Bundle bundle);
  const std::vector<BundleRecord>& bundles() const { return bundles_; }

  // Per-gate values for one in-domain input.
  std::vector<bool> simulate(std::span<const std::int64_t> input) const;
  // 64 inputs at once: lane k of word i is input bit i of the k-th input.
  std::vector<std::uint64_t> simulate_lanes(std::span<const std::uint64_t> input_words) const;
  // Packs up to 64 inputs into per-bit lane words.
  std::vector<std::uint64_t> pack_inputs(std::span<const std::vector<std::int64_t>> inputs) const;

  // Gates reachable from the roots (constants and inputs excluded).
  std::size_t reachable_gates(std::span<const Wire> roots) const;
  std::vector<bool> reachable_mask(std::span<const Wire> roots) const;

  // Line-oriented gate listing for debugging; not a stable format.
  std::string dump() const;

 private:
  Wire intern(GateKind kind, std::uint32_t a, std::uint32_t b);
  bool is_negation_of(Wire a, Wire b) const;

  InputDomain domain_;
  std::vector<Gate> gates_;
  std::unordered_map<std::uint64_t, std::uint32_t> table_;
  std::map<std::string, Wire> outputs_;
  std::vector<BundleRecord> bundles_;
  Wire domain_ok_;
};

// Two's-complement value carried by a bundle in a simulation.
BigInt bundle_value(const Bundle& bundle, const std::vector<bool>& simulation);

}  // namespace exactml
