#include "exactml/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>

#include "json_util.hpp"

namespace exactml {

struct Predicate::Node {
  Kind kind = Kind::constant;
  bool value = false;
  Operand lhs;
  Operand rhs;
  CmpOp op = CmpOp::eq;
  std::vector<Predicate> children;
};

namespace {

bool apply(CmpOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case CmpOp::le: return a <= b;
    case CmpOp::lt: return a < b;
    case CmpOp::eq: return a == b;
    case CmpOp::ne: return a != b;
    case CmpOp::ge: return a >= b;
    case CmpOp::gt: return a > b;
  }
  return false;
}

const char* op_text(CmpOp op) {
  switch (op) {
    case CmpOp::le: return "<=";
    case CmpOp::lt: return "<";
    case CmpOp::eq: return "=";
    case CmpOp::ne: return "!=";
    case CmpOp::ge: return ">=";
    case CmpOp::gt: return ">";
  }
  return "?";
}

}  // namespace

Predicate Predicate::truth(bool value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->value = value;
  return Predicate(std::move(n));
}

Predicate Predicate::compare(Operand lhs, CmpOp op, Operand rhs) {
  if (!lhs.is_feature && !rhs.is_feature) return truth(apply(op, lhs.constant, rhs.constant));
  if (lhs.is_feature && rhs.is_feature && lhs.feature == rhs.feature) return truth(apply(op, 0, 0));
  auto n = std::make_shared<Node>();
  n->kind = Kind::compare;
  n->lhs = lhs;
  n->rhs = rhs;
  n->op = op;
  return Predicate(std::move(n));
}

Predicate Predicate::negate(const Predicate& p) {
  if (p.kind() == Kind::constant) return truth(!p.constant_value());
  if (p.kind() == Kind::negation) return p.children().front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::negation;
  n->children.push_back(p);
  return Predicate(std::move(n));
}

namespace {

// Shared body of all_of / any_of: `absorbing` is the constant that decides
// the whole connective.
std::optional<std::vector<Predicate>> flatten(std::vector<Predicate> parts, Predicate::Kind kind,
                                              bool absorbing) {
  std::vector<Predicate> kept;
  for (auto& p : parts) {
    if (p.kind() == Predicate::Kind::constant) {
      if (p.constant_value() == absorbing) return std::nullopt;
      continue;
    }
    if (p.kind() == kind) {
      for (const auto& c : p.children()) kept.push_back(c);
      continue;
    }
    kept.push_back(std::move(p));
  }
  return kept;
}

}  // namespace

Predicate Predicate::all_of(std::vector<Predicate> parts) {
  auto kept = flatten(std::move(parts), Kind::conjunction, false);
  if (!kept) return truth(false);
  if (kept->empty()) return truth(true);
  if (kept->size() == 1) return kept->front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::conjunction;
  n->children = std::move(*kept);
  return Predicate(std::move(n));
}

Predicate Predicate::any_of(std::vector<Predicate> parts) {
  auto kept = flatten(std::move(parts), Kind::disjunction, true);
  if (!kept) return truth(true);
  if (kept->empty()) return truth(false);
  if (kept->size() == 1) return kept->front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::disjunction;
  n->children = std::move(*kept);
  return Predicate(std::move(n));
}

Predicate Predicate::implies(const Predicate& premise, const Predicate& conclusion) {
  return any_of({negate(premise), conclusion});
}

Predicate::Kind Predicate::kind() const { return node_->kind; }
bool Predicate::constant_value() const { return node_->value; }
const Operand& Predicate::lhs() const { return node_->lhs; }
const Operand& Predicate::rhs() const { return node_->rhs; }
CmpOp Predicate::op() const { return node_->op; }
std::span<const Predicate> Predicate::children() const { return node_->children; }

bool Predicate::eval(std::span<const std::int64_t> input) const {
  switch (node_->kind) {
    case Kind::constant: return node_->value;
    case Kind::compare: return apply(node_->op, node_->lhs.value(input), node_->rhs.value(input));
    case Kind::negation: return !node_->children.front().eval(input);
    case Kind::conjunction:
      return std::all_of(node_->children.begin(), node_->children.end(),
                         [&](const Predicate& c) { return c.eval(input); });
    case Kind::disjunction:
      return std::any_of(node_->children.begin(), node_->children.end(),
                         [&](const Predicate& c) { return c.eval(input); });
  }
  return false;
}

std::string Predicate::to_string(const InputDomain& domain) const {
  auto operand = [&](const Operand& o) {
    return o.is_feature ? domain.feature(o.feature).name : std::to_string(o.constant);
  };
  switch (node_->kind) {
    case Kind::constant: return node_->value ? "true" : "false";
    case Kind::compare: return operand(node_->lhs) + " " + op_text(node_->op) + " " + operand(node_->rhs);
    case Kind::negation: return "!(" + node_->children.front().to_string(domain) + ")";
    case Kind::conjunction:
    case Kind::disjunction: {
      const char* sep = node_->kind == Kind::conjunction ? " && " : " || ";
      std::string out = "(";
      for (std::size_t i = 0; i < node_->children.size(); ++i) {
        if (i) out += sep;
        out += node_->children[i].to_string(domain);
      }
      return out + ")";
    }
  }
  return {};
}

std::size_t Predicate::node_count() const {
  std::size_t n = 1;
  for (const auto& c : node_->children) n += c.node_count();
  return n;
}

bool eval_predicate(const Predicate& pred, const InputDomain& domain,
                    std::span<const std::int64_t> input) {
  domain.check(input);
  return pred.eval(input);
}

PredicateSyntaxError::PredicateSyntaxError(const std::string& message, std::size_t position)
    : InputError(message + " at position " + std::to_string(position)), position_(position) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok {
  ident, number, lparen, rparen, lbrack, rbrack, comma, colon, plus, minus,
  le, lt, eq, ne, ge, gt, bang, and_, or_, arrow, end,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t len) {
    out.push_back({k, std::string(s.substr(i, len)), i});
    i += len;
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string word(s.substr(i, j - i));
      Tok k = Tok::ident;
      if (word == "and") k = Tok::and_;
      else if (word == "or") k = Tok::or_;
      else if (word == "not") k = Tok::bang;
      else if (word == "implies") k = Tok::arrow;
      push(k, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      push(Tok::number, j - i);
      continue;
    }
    auto two = s.substr(i, 2);
    if (two == "<=") push(Tok::le, 2);
    else if (two == ">=") push(Tok::ge, 2);
    else if (two == "==") push(Tok::eq, 2);
    else if (two == "!=") push(Tok::ne, 2);
    else if (two == "&&") push(Tok::and_, 2);
    else if (two == "||") push(Tok::or_, 2);
    else if (two == "->" || two == "=>") push(Tok::arrow, 2);
    else if (c == '<') push(Tok::lt, 1);
    else if (c == '>') push(Tok::gt, 1);
    else if (c == '=') push(Tok::eq, 1);
    else if (c == '!') push(Tok::bang, 1);
    else if (c == '(') push(Tok::lparen, 1);
    else if (c == ')') push(Tok::rparen, 1);
    else if (c == '[') push(Tok::lbrack, 1);
    else if (c == ']') push(Tok::rbrack, 1);
    else if (c == ',') push(Tok::comma, 1);
    else if (c == ':') push(Tok::colon, 1);
    else if (c == '+') push(Tok::plus, 1);
    else if (c == '-') push(Tok::minus, 1);
    else throw PredicateSyntaxError(std::string("syntax error: unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const InputDomain& domain)
      : toks_(std::move(tokens)), domain_(domain) {}

  Predicate parse_all() {
    Predicate p = formula();
    if (peek().kind != Tok::end) fail("syntax error: unexpected '" + peek().text + "'");
    return p;
  }

 private:
  // A term is either a feature or a static integer; quantifier variables and
  // literals both yield the latter.
  using Term = Operand;

  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw PredicateSyntaxError(msg, peek().pos); }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("syntax error: expected ") + what);
  }

  bool at_quantifier() const {
    return peek().kind == Tok::ident && (peek().text == "forall" || peek().text == "exists");
  }

  Predicate formula() {
    if (at_quantifier()) return quantified();
    Predicate lhs = disjunction();
    if (accept(Tok::arrow)) return Predicate::implies(lhs, formula());
    return lhs;
  }

  std::int64_t bound_literal() {
    bool negative = accept(Tok::minus);
    if (peek().kind == Tok::ident) fail("non-constant quantifier bound '" + peek().text + "'");
    if (peek().kind != Tok::number) fail("syntax error: expected an integer quantifier bound");
    std::int64_t v = number(take());
    return negative ? -v : v;
  }

  Predicate quantified() {
    const bool universal = take().text == "forall";
    std::vector<std::string> vars;
    do {
      if (peek().kind != Tok::ident) fail("syntax error: expected a quantifier variable");
      vars.push_back(take().text);
    } while (accept(Tok::comma));
    if (peek().kind != Tok::ident || peek().text != "in") fail("syntax error: expected 'in'");
    take();
    expect(Tok::lbrack, "'['");
    std::int64_t lo = bound_literal();
    expect(Tok::comma, "','");
    std::int64_t hi = bound_literal();
    if (accept(Tok::rbrack)) ++hi;
    else expect(Tok::rparen, "')' or ']'");
    expect(Tok::colon, "':'");

    const std::size_t body = pos_;
    std::size_t body_end = body;
    std::vector<Predicate> parts;
    // Odometer over all variables; each binding re-parses the body.
    std::vector<std::int64_t> values(vars.size(), lo);
    bool empty = lo >= hi;
    if (!empty) {
      double bindings = 1;
      for (std::size_t k = 0; k < vars.size(); ++k) bindings *= static_cast<double>(hi - lo);
      if (bindings > 1e6) fail("quantifier range too large");
    }
    while (!empty) {
      for (std::size_t k = 0; k < vars.size(); ++k) env_.push_back({vars[k], values[k]});
      pos_ = body;
      parts.push_back(formula());
      body_end = pos_;
      env_.resize(env_.size() - vars.size());
      std::size_t k = vars.size();
      while (k-- > 0) {
        if (++values[k] < hi) break;
        values[k] = lo;
        if (k == 0) empty = true;
      }
    }
    if (lo >= hi) {
      // Still consume the body so the grammar stays well-defined; bind the
      // variables to lo so references resolve.
      for (const auto& v : vars) env_.push_back({v, lo});
      pos_ = body;
      try {
        formula();
      } catch (const PredicateSyntaxError&) {
        env_.resize(env_.size() - vars.size());
        throw;
      }
      body_end = pos_;
      env_.resize(env_.size() - vars.size());
    }
    pos_ = body_end;
    return universal ? Predicate::all_of(std::move(parts)) : Predicate::any_of(std::move(parts));
  }

  Predicate disjunction() {
    std::vector<Predicate> parts{conjunction()};
    while (accept(Tok::or_)) parts.push_back(conjunction());
    return parts.size() == 1 ? parts.front() : Predicate::any_of(std::move(parts));
  }

  Predicate conjunction() {
    std::vector<Predicate> parts{unary()};
    while (accept(Tok::and_)) parts.push_back(unary());
    return parts.size() == 1 ? parts.front() : Predicate::all_of(std::move(parts));
  }

  Predicate unary() {
    if (accept(Tok::bang)) return Predicate::negate(unary());
    if (at_quantifier()) return quantified();
    if (accept(Tok::lparen)) {
      Predicate p = formula();
      expect(Tok::rparen, "')'");
      return p;
    }
    if (peek().kind == Tok::ident && (peek().text == "true" || peek().text == "false"))
      return Predicate::truth(take().text == "true");
    return comparison();
  }

  Predicate comparison() {
    const std::size_t start = peek().pos;
    Term lhs = term();
    std::optional<CmpOp> op;
    switch (peek().kind) {
      case Tok::le: op = CmpOp::le; break;
      case Tok::lt: op = CmpOp::lt; break;
      case Tok::eq: op = CmpOp::eq; break;
      case Tok::ne: op = CmpOp::ne; break;
      case Tok::ge: op = CmpOp::ge; break;
      case Tok::gt: op = CmpOp::gt; break;
      default: break;
    }
    if (!op) {
      if (!lhs.is_feature) throw PredicateSyntaxError("syntax error: integer used as a condition", start);
      return Predicate::compare(lhs, CmpOp::ne, Operand::of_constant(0));
    }
    take();
    Term rhs = term();
    return Predicate::compare(lhs, *op, rhs);
  }

  std::int64_t number(const Token& t) const {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) throw PredicateSyntaxError("integer literal out of range", t.pos);
    return v;
  }

  const std::int64_t* lookup_var(const std::string& name) const {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  // Static integer expression: literals, quantifier variables, + and -.
  std::int64_t index_expr() {
    std::int64_t value = index_atom();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      bool plus = take().kind == Tok::plus;
      std::int64_t rhs = index_atom();
      value = plus ? value + rhs : value - rhs;
    }
    return value;
  }

  std::int64_t index_atom() {
    if (accept(Tok::minus)) return -index_atom();
    if (accept(Tok::lparen)) {
      std::int64_t v = index_expr();
      expect(Tok::rparen, "')'");
      return v;
    }
    if (peek().kind == Tok::number) return number(take());
    if (peek().kind == Tok::ident) {
      if (const auto* v = lookup_var(peek().text)) {
        take();
        return *v;
      }
      fail("unknown quantifier variable '" + peek().text + "'");
    }
    fail("syntax error: expected an index expression");
  }

  Term term() {
    if (peek().kind == Tok::ident && !lookup_var(peek().text)) {
      const Token& name = take();
      std::string full = name.text;
      while (accept(Tok::lbrack)) {
        full += "[" + std::to_string(index_expr()) + "]";
        expect(Tok::rbrack, "']'");
      }
      std::size_t index = domain_.find(full);
      if (index == InputDomain::npos)
        throw PredicateSyntaxError("unknown feature '" + full + "'", name.pos);
      return Operand::of_feature(index);
    }
    return Operand::of_constant(index_expr());
  }

  std::vector<Token> toks_;
  const InputDomain& domain_;
  std::size_t pos_ = 0;
  std::vector<std::pair<std::string, std::int64_t>> env_;
};

}  // namespace

Predicate parse_predicate(std::string_view text, const InputDomain& domain) {
  return Parser(tokenize(text), domain).parse_all();
}

// ---------------------------------------------------------------------------
// Graph properties

namespace {

struct NamedProperty {
  GraphProperty property;
  std::string_view name;
};

constexpr NamedProperty kPropertyNames[] = {
    {GraphProperty::antisymmetric, "Antisymmetric"},
    {GraphProperty::connex, "Connex"},
    {GraphProperty::equivalence, "Equivalence"},
    {GraphProperty::irreflexive, "Irreflexive"},
    {GraphProperty::non_strict_order, "NonStrictOrder"},
    {GraphProperty::partial_order, "PartialOrder"},
    {GraphProperty::pre_order, "PreOrder"},
    {GraphProperty::reflexive, "Reflexive"},
    {GraphProperty::strict_order, "StrictOrder"},
    {GraphProperty::total_order, "TotalOrder"},
    {GraphProperty::transitive, "Transitive"},
};

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != '_' && c != '-' && c != ' ') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class GraphBuilder {
 public:
  explicit GraphBuilder(int n) : n_(n) {}

  Predicate edge(int i, int j) const {
    return Predicate::compare(Operand::of_feature(static_cast<std::size_t>(i * n_ + j)), CmpOp::eq,
                              Operand::of_constant(1));
  }

  Predicate reflexive() const {
    std::vector<Predicate> parts;
    for (int i = 0; i < n_; ++i) parts.push_back(edge(i, i));
    return Predicate::all_of(std::move(parts));
  }

  Predicate irreflexive() const {
    std::vector<Predicate> parts;
    for (int i = 0; i < n_; ++i) parts.push_back(Predicate::negate(edge(i, i)));
    return Predicate::all_of(std::move(parts));
  }

  Predicate symmetric() const {
    std::vector<Predicate> parts;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (i != j) parts.push_back(Predicate::implies(edge(i, j), edge(j, i)));
    return Predicate::all_of(std::move(parts));
  }

  Predicate antisymmetric() const {
    std::vector<Predicate> parts;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (i != j) parts.push_back(Predicate::negate(Predicate::all_of({edge(i, j), edge(j, i)})));
    return Predicate::all_of(std::move(parts));
  }

  Predicate transitive() const {
    std::vector<Predicate> parts;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          parts.push_back(Predicate::implies(Predicate::all_of({edge(i, j), edge(j, k)}), edge(i, k)));
    return Predicate::all_of(std::move(parts));
  }

  Predicate connex() const {
    std::vector<Predicate> parts;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (i != j) parts.push_back(Predicate::any_of({edge(i, j), edge(j, i)}));
    return Predicate::all_of(std::move(parts));
  }

 private:
  int n_;
};

}  // namespace

GraphProperty parse_graph_property(std::string_view name) {
  const std::string key = normalize(name);
  for (const auto& entry : kPropertyNames)
    if (normalize(entry.name) == key) return entry.property;
  throw InputError("unknown graph property '" + std::string(name) + "'");
}

std::string_view graph_property_name(GraphProperty p) {
  for (const auto& entry : kPropertyNames)
    if (entry.property == p) return entry.name;
  return "?";
}

Predicate builtin_graph_property(GraphProperty property, int nodes) {
  if (nodes <= 0) throw InputError("graph property needs at least one node");
  GraphBuilder g(nodes);
  switch (property) {
    case GraphProperty::antisymmetric: return g.antisymmetric();
    case GraphProperty::connex: return g.connex();
    case GraphProperty::equivalence:
      return Predicate::all_of({g.reflexive(), g.symmetric(), g.transitive()});
    case GraphProperty::irreflexive: return g.irreflexive();
    case GraphProperty::non_strict_order:
      return Predicate::all_of({g.reflexive(), g.antisymmetric(), g.transitive()});
    case GraphProperty::partial_order:
      // preorder plus antisymmetry
      return Predicate::all_of({g.reflexive(), g.transitive(), g.antisymmetric()});
    case GraphProperty::pre_order: return Predicate::all_of({g.reflexive(), g.transitive()});
    case GraphProperty::reflexive: return g.reflexive();
    case GraphProperty::strict_order: return Predicate::all_of({g.irreflexive(), g.transitive()});
    case GraphProperty::total_order:
      return Predicate::all_of({g.reflexive(), g.antisymmetric(), g.transitive(), g.connex()});
    case GraphProperty::transitive: return g.transitive();
  }
  throw InputError("unknown graph property");
}

std::vector<Predicate> binary_truth(const Predicate& positive) {
  return {Predicate::negate(positive), positive};
}

std::vector<Predicate> load_truth(const nlohmann::json& doc, const InputDomain& domain) {
  detail::expect_format_version(doc, "truth");
  auto text = [&](const nlohmann::json& v, const char* what) {
    if (!v.is_string()) throw InputError(std::string(what) + " must be a predicate string");
    return parse_predicate(v.get<std::string>(), domain);
  };
  if (doc.contains("positive")) return binary_truth(text(doc.at("positive"), "positive"));
  if (!doc.contains("labels") || !doc.at("labels").is_array())
    throw InputError("truth document needs 'positive' or a 'labels' array");
  std::vector<Predicate> out;
  for (const auto& p : doc.at("labels")) out.push_back(text(p, "labels entry"));
  if (out.empty()) throw InputError("truth document has no labels");
  return out;
}

std::vector<ClassLabel> SafetyProperty::allowed(int num_labels) const {
  for (auto l : labels)
    if (l < 0 || l >= num_labels)
      throw InputError("post-condition label " + std::to_string(l) + " is not below num_labels " +
                       std::to_string(num_labels));
  std::vector<ClassLabel> out;
  for (ClassLabel l = 0; l < num_labels; ++l) {
    bool listed = std::find(labels.begin(), labels.end(), l) != labels.end();
    if (listed != exclude) out.push_back(l);
  }
  return out;
}

SafetyProperty make_safety(Predicate pre, std::string_view post) {
  SafetyProperty p;
  p.pre = std::move(pre);
  post = detail::trim(post);
  if (!post.empty() && post.front() == '!') {
    p.exclude = true;
    post.remove_prefix(1);
  }
  for (auto v : parse_int_list(post)) p.labels.push_back(static_cast<ClassLabel>(v));
  return p;
}

SafetyProperty load_safety(const nlohmann::json& doc, const InputDomain& domain) {
  detail::expect_format_version(doc, "safety property");
  SafetyProperty p;
  if (doc.contains("pre")) {
    if (!doc.at("pre").is_string()) throw InputError("'pre' must be a predicate string");
    p.pre = parse_predicate(doc.at("pre").get<std::string>(), domain);
  }
  if (!doc.contains("post")) throw InputError("safety property needs 'post'");
  const nlohmann::json* labels = &doc.at("post");
  if (labels->is_object()) {
    if (!labels->contains("not")) throw InputError("'post' object needs a 'not' label list");
    p.exclude = true;
    labels = &labels->at("not");
  }
  if (!labels->is_array()) throw InputError("'post' must be a label list");
  for (const auto& l : *labels) p.labels.push_back(detail::get_int<int>(l, "post label"));
  return p;
}

bool RobustnessRegion::contains(std::span<const std::int64_t> input) const {
  if (input.size() != intervals.size()) return false;
  for (std::size_t i = 0; i < input.size(); ++i)
    if (input[i] < intervals[i].first || input[i] > intervals[i].second) return false;
  return true;
}

InputDomain RobustnessRegion::as_domain(const InputDomain& domain) const {
  std::vector<FeatureSpec> features;
  for (std::size_t i = 0; i < intervals.size(); ++i)
    features.push_back({domain.feature(i).name, intervals[i].first, intervals[i].second});
  return InputDomain(std::move(features));
}

RobustnessRegion make_region(std::span<const std::int64_t> center, std::int64_t epsilon,
                             const InputDomain& domain) {
  if (epsilon < 0) throw InputError("epsilon must be non-negative");
  domain.check(center);
  RobustnessRegion r;
  r.center.assign(center.begin(), center.end());
  r.epsilon = epsilon;
  r.size = 1;
  for (std::size_t i = 0; i < center.size(); ++i) {
    const auto& f = domain.feature(i);
    // Saturating bounds: center +/- epsilon may overflow int64.
    std::int64_t lo = center[i] - f.lo <= epsilon ? f.lo : center[i] - epsilon;
    std::int64_t hi = f.hi - center[i] <= epsilon ? f.hi : center[i] + epsilon;
    r.intervals.emplace_back(lo, hi);
    r.size *= from_int64(hi) - from_int64(lo) + 1;
  }
  return r;
}

}  // namespace exactml
