#include "exactml/domain.hpp"

#include <charconv>
#include <limits>

#include "exactml/error.hpp"
#include "json_util.hpp"

namespace exactml {

unsigned FeatureSpec::width() const {
  BigInt span = range() - 1;
  if (span == 0) return 0;
  return static_cast<unsigned>(mpz_sizeinbase(span.get_mpz_t(), 2));
}

InputDomain::InputDomain(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  offsets_.reserve(features_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto& f = features_[i];
    if (f.name.empty()) throw InputError("feature " + std::to_string(i) + " has an empty name");
    if (f.lo > f.hi) throw InputError("empty feature range for '" + f.name + "'");
    if (!by_name_.emplace(f.name, i).second)
      throw InputError("duplicate feature name '" + f.name + "'");
    if (f.width() > 64) throw InputError("feature '" + f.name + "' is wider than 64 bits");
    offsets_.push_back(total_bits_);
    total_bits_ += f.width();
  }
}

InputDomain InputDomain::graph(int nodes) {
  if (nodes <= 0) throw InputError("graph domain needs at least one node");
  std::vector<FeatureSpec> features;
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      features.push_back({"e[" + std::to_string(i) + "][" + std::to_string(j) + "]", 0, 1});
  return InputDomain(std::move(features));
}

std::size_t InputDomain::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? npos : it->second;
}

BigInt InputDomain::cardinality() const {
  BigInt n = 1;
  for (const auto& f : features_) n *= f.range();
  return n;
}

bool InputDomain::contains(std::span<const std::int64_t> input) const {
  if (input.size() != features_.size()) return false;
  for (std::size_t i = 0; i < input.size(); ++i)
    if (input[i] < features_[i].lo || input[i] > features_[i].hi) return false;
  return true;
}

void InputDomain::check(std::span<const std::int64_t> input) const {
  if (input.size() != features_.size())
    throw InputError("input has " + std::to_string(input.size()) + " values, domain has " +
                     std::to_string(features_.size()) + " features");
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& f = features_[i];
    if (input[i] < f.lo || input[i] > f.hi)
      throw InputError("value " + std::to_string(input[i]) + " of feature '" + f.name +
                       "' is outside [" + std::to_string(f.lo) + ", " + std::to_string(f.hi) +
                       "]");
  }
}

InputDomain InputDomain::restrict(const FixedInputs& fixed) const {
  std::vector<FeatureSpec> narrowed = features_;
  for (auto [index, value] : fixed) {
    if (index >= narrowed.size()) throw InputError("fixed feature index out of range");
    auto& f = narrowed[index];
    if (value < f.lo || value > f.hi)
      throw InputError("fixed value " + std::to_string(value) + " of feature '" + f.name +
                       "' is out of range");
    f.lo = f.hi = value;
  }
  return InputDomain(std::move(narrowed));
}

DomainCursor::DomainCursor(const InputDomain& domain) : domain_(&domain) {
  current_.reserve(domain.size());
  for (const auto& f : domain.features()) current_.push_back(f.lo);
}

void DomainCursor::next() {
  for (std::size_t i = current_.size(); i-- > 0;) {
    const auto& f = domain_->feature(i);
    if (current_[i] < f.hi) {
      ++current_[i];
      return;
    }
    current_[i] = f.lo;
  }
  done_ = true;
}

InputDomain load_domain(const nlohmann::json& doc) {
  detail::expect_format_version(doc, "domain");
  std::vector<FeatureSpec> features;
  if (doc.contains("graph")) {
    const auto& g = doc.at("graph");
    int nodes = detail::get_int<int>(g.is_object() ? g.at("nodes") : g, "graph.nodes");
    return InputDomain::graph(nodes);
  }
  if (!doc.contains("features") || !doc.at("features").is_array())
    throw InputError("domain document needs a 'features' array");
  for (const auto& entry : doc.at("features")) {
    if (!entry.is_object()) throw InputError("feature entries must be objects");
    if (!entry.contains("name") || !entry.at("name").is_string())
      throw InputError("feature entry without a string 'name'");
    std::string name = entry.at("name").get<std::string>();
    auto lo = detail::get_int<std::int64_t>(entry.at("lo"), name + ".lo");
    auto hi = detail::get_int<std::int64_t>(entry.at("hi"), name + ".hi");
    if (entry.contains("count")) {
      int count = detail::get_int<int>(entry.at("count"), name + ".count");
      if (count <= 0) throw InputError("feature group '" + name + "' needs a positive count");
      for (int k = 0; k < count; ++k)
        features.push_back({name + "[" + std::to_string(k) + "]", lo, hi});
    } else {
      features.push_back({std::move(name), lo, hi});
    }
  }
  return InputDomain(std::move(features));
}

InputDomain load_domain(std::string_view text) {
  return load_domain(detail::parse_json(text, "domain"));
}

nlohmann::ordered_json emit_domain(const InputDomain& domain) {
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& f : domain.features())
    features.push_back({{"name", f.name}, {"lo", f.lo}, {"hi", f.hi}});
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["features"] = std::move(features);
  return doc;
}

std::vector<std::int64_t> parse_int_list(std::string_view text) {
  std::vector<std::int64_t> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = detail::trim(text.substr(pos, comma - pos));
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw InputError("not an integer: '" + std::string(item) + "'");
    values.push_back(v);
    pos = comma + 1;
  }
  return values;
}

FixedInputs parse_fixed(std::string_view text, const InputDomain& domain) {
  FixedInputs fixed;
  if (detail::trim(text).empty()) return fixed;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    // Feature names may contain commas only inside brackets; they do not.
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw InputError("expected name=value in '" + std::string(item) + "'");
    std::string_view name = detail::trim(item.substr(0, eq));
    std::size_t index = domain.find(name);
    if (index == InputDomain::npos) throw InputError("unknown feature '" + std::string(name) + "'");
    auto values = parse_int_list(item.substr(eq + 1));
    const auto& f = domain.feature(index);
    if (values[0] < f.lo || values[0] > f.hi)
      throw InputError("fixed value " + std::to_string(values[0]) + " of feature '" + f.name +
                       "' is out of range");
    fixed[index] = values[0];
    pos = comma + 1;
  }
  return fixed;
}

}  // namespace exactml
