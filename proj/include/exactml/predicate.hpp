#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "exactml/domain.hpp"
#include "exactml/error.hpp"
#include "exactml/model.hpp"

namespace exactml {

enum class CmpOp { le, lt, eq, ne, ge, gt };

// Either a feature reference or an integer constant.
struct Operand {
  bool is_feature = false;
  std::size_t feature = 0;
  std::int64_t constant = 0;

  static Operand of_feature(std::size_t index) { return {true, index, 0}; }
  static Operand of_constant(std::int64_t value) { return {false, 0, value}; }
  std::int64_t value(std::span<const std::int64_t> input) const {
    return is_feature ? input[feature] : constant;
  }
};

// Immutable boolean formula over input features. The factory functions fold
// constants, so a predicate that is trivially true or false after quantifier
// expansion is a single constant node.
class Predicate {
 public:
  enum class Kind { constant, compare, negation, conjunction, disjunction };

  static Predicate truth(bool value);
  static Predicate compare(Operand lhs, CmpOp op, Operand rhs);
  static Predicate negate(const Predicate& p);
  static Predicate all_of(std::vector<Predicate> parts);
  static Predicate any_of(std::vector<Predicate> parts);
  static Predicate implies(const Predicate& premise, const Predicate& conclusion);

  Kind kind() const;
  bool constant_value() const;
  const Operand& lhs() const;
  const Operand& rhs() const;
  CmpOp op() const;
  std::span<const Predicate> children() const;

  // No domain check; see eval_predicate.
  bool eval(std::span<const std::int64_t> input) const;

  std::string to_string(const InputDomain& domain) const;
  std::size_t node_count() const;

 private:
  struct Node;
  explicit Predicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

bool eval_predicate(const Predicate& pred, const InputDomain& domain,
                    std::span<const std::int64_t> input);

class PredicateSyntaxError : public InputError {
 public:
  PredicateSyntaxError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Infix grammar:
//   formula  := ('forall'|'exists') var (',' var)* 'in' '[' int ',' int (')'|']') ':' formula
//             | disj (('->'|'=>'|'implies') formula)?
//   disj     := conj (('||'|'or') conj)*
//   conj     := unary (('&&'|'and') unary)*
//   unary    := ('!'|'not') unary | '(' formula ')' | 'true' | 'false' | term (cmp term)?
//   term     := feature reference (name, optionally indexed: e[i][j+1]) or an
//               integer expression over literals and quantifier variables
//   cmp      := '<=' | '<' | '=' | '==' | '!=' | '>=' | '>'
// A bare feature in boolean position means "feature != 0". Quantifiers are
// expanded during parsing.
Predicate parse_predicate(std::string_view text, const InputDomain& domain);

enum class GraphProperty {
  antisymmetric,
  connex,
  equivalence,
  irreflexive,
  non_strict_order,
  partial_order,
  pre_order,
  reflexive,
  strict_order,
  total_order,
  transitive,
};

inline constexpr GraphProperty kAllGraphProperties[] = {
    GraphProperty::antisymmetric,  GraphProperty::connex,       GraphProperty::equivalence,
    GraphProperty::irreflexive,    GraphProperty::non_strict_order, GraphProperty::partial_order,
    GraphProperty::pre_order,      GraphProperty::reflexive,    GraphProperty::strict_order,
    GraphProperty::total_order,    GraphProperty::transitive,
};

// Case-insensitive; '_' and '-' are ignored ("PreOrder", "pre_order").
GraphProperty parse_graph_property(std::string_view name);
std::string_view graph_property_name(GraphProperty p);

// Over InputDomain::graph(nodes): feature i*nodes+j is edge e[i][j].
Predicate builtin_graph_property(GraphProperty property, int nodes);

// One predicate per label, psi_l. For binary problems: {not p, p}.
std::vector<Predicate> binary_truth(const Predicate& positive);

// {"format_version":1, "positive": "<pred>"} or
// {"format_version":1, "labels": ["<pred for 0>", ...]}.
std::vector<Predicate> load_truth(const nlohmann::json& document, const InputDomain& domain);

// Pre => model label in the allowed set.
struct SafetyProperty {
  Predicate pre = Predicate::truth(true);
  std::vector<ClassLabel> labels;
  bool exclude = false;  // labels lists forbidden outputs instead of allowed ones

  // Sorted allowed labels for a model with `num_labels` outputs; throws on
  // labels outside [0, num_labels).
  std::vector<ClassLabel> allowed(int num_labels) const;
};

// Label set syntax: "1,2" (allowed) or "!3" / "!1,2" (forbidden).
SafetyProperty make_safety(Predicate pre, std::string_view post);
// {"format_version":1, "pre": "<pred>", "post": [labels]} or
// "post": {"not": [labels]}.
SafetyProperty load_safety(const nlohmann::json& document, const InputDomain& domain);

// L-infinity ball around `center`, clipped to the domain.
struct RobustnessRegion {
  std::vector<std::int64_t> center;
  std::int64_t epsilon = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
  BigInt size;

  bool contains(std::span<const std::int64_t> input) const;
  // The region as a domain with the same feature names.
  InputDomain as_domain(const InputDomain& domain) const;
};

RobustnessRegion make_region(std::span<const std::int64_t> center, std::int64_t epsilon,
                             const InputDomain& domain);

}  // namespace exactml
