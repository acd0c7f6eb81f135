#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "exactml/bigint.hpp"

namespace exactml {

struct FeatureSpec {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  // Number of values in [lo, hi].
  BigInt range() const { return from_int64(hi) - from_int64(lo) + 1; }
  // ceil(log2(range)); zero when lo == hi.
  unsigned width() const;

  bool operator==(const FeatureSpec&) const = default;
};

// Feature index -> concrete value.
using FixedInputs = std::map<std::size_t, std::int64_t>;

// Ordered list of bounded integer features. Each feature is encoded in
// offset binary (value - lo) over width() bits; bit layout is feature order,
// low bit first.
class InputDomain {
 public:
  InputDomain() = default;
  explicit InputDomain(std::vector<FeatureSpec> features);

  // n*n binary features named e[i][j], row-major.
  static InputDomain graph(int nodes);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  std::span<const FeatureSpec> features() const { return features_; }

  // Index of the feature with this name, or npos.
  std::size_t find(std::string_view name) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  BigInt cardinality() const;

  std::size_t total_bits() const { return total_bits_; }
  std::size_t bit_offset(std::size_t feature) const { return offsets_.at(feature); }

  bool contains(std::span<const std::int64_t> input) const;
  // Throws InputError naming the first offending feature.
  void check(std::span<const std::int64_t> input) const;

  // Same features with the fixed ones narrowed to a single value.
  InputDomain restrict(const FixedInputs& fixed) const;

  bool operator==(const InputDomain& other) const { return features_ == other.features_; }

 private:
  std::vector<FeatureSpec> features_;
  std::vector<std::size_t> offsets_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::size_t total_bits_ = 0;
};

// Odometer over every point of a domain in lexicographic order (feature 0 is
// the most significant position).
class DomainCursor {
 public:
  explicit DomainCursor(const InputDomain& domain);
  const std::vector<std::int64_t>& value() const { return current_; }
  bool done() const { return done_; }
  void next();

 private:
  const InputDomain* domain_;
  std::vector<std::int64_t> current_;
  bool done_ = false;
};

InputDomain load_domain(const nlohmann::json& document);
InputDomain load_domain(std::string_view text);
nlohmann::ordered_json emit_domain(const InputDomain& domain);

// Parses "a,b,c" into integers.
std::vector<std::int64_t> parse_int_list(std::string_view text);
// Parses "f0=1,e[0][1]=0" against the domain; values are range-checked.
FixedInputs parse_fixed(std::string_view text, const InputDomain& domain);

}  // namespace exactml
