#include "exactml/cnf.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "exactml/error.hpp"
#include "json_util.hpp"

namespace exactml {

void CnfFormula::validate() const {
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (clauses[i].empty()) throw InputError("clause " + std::to_string(i) + " is empty");
    for (Lit l : clauses[i]) {
      if (l == 0) throw InputError("clause " + std::to_string(i) + " contains literal 0");
      if (std::abs(l) > num_vars) throw InputError("literal out of range: " + std::to_string(l));
    }
  }
  for (int v : projection)
    if (v < 1 || v > num_vars) throw InputError("projection variable out of range: " + std::to_string(v));
  if (!defines.empty() && defines.size() != clauses.size()) throw InputError("gate structure does not match clauses");
}

std::size_t CnfFormula::num_literals() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.size();
  return n;
}

CnfFormula tseitin(const Circuit& circuit, Wire root) {
  if (root.id >= circuit.size()) throw InputError("root wire does not exist");
  CnfFormula cnf;
  const int inputs = static_cast<int>(circuit.num_inputs());
  cnf.num_vars = inputs;
  for (int v = 1; v <= inputs; ++v) cnf.projection.push_back(v);

  // A constant-true wire needs no clause, so it is left out of the encoding.
  std::vector<Wire> roots;
  for (Wire w : {root, circuit.domain_constraint()})
    if (circuit.constant_value(w) != true) roots.push_back(w);
  const auto live = circuit.reachable_mask(roots);
  std::vector<Lit> lit(circuit.size(), 0);
  Lit true_lit = 0;
  auto constant_lit = [&](bool value) {
    if (true_lit == 0) {
      true_lit = ++cnf.num_vars;
      cnf.clauses.push_back({true_lit});
      cnf.defines.push_back(0);
    }
    return value ? true_lit : -true_lit;
  };

  for (std::uint32_t i = 0; i < circuit.size(); ++i) {
    if (!live[i]) continue;
    const Gate& g = circuit.gate(Wire{i});
    switch (g.kind) {
      case GateKind::constant: lit[i] = constant_lit(g.a != 0); break;
      case GateKind::input: lit[i] = static_cast<Lit>(g.a) + 1; break;
      case GateKind::not_: lit[i] = -lit[g.a]; break;
      case GateKind::and_: {
        const Lit o = ++cnf.num_vars, a = lit[g.a], b = lit[g.b];
        cnf.clauses.push_back({-o, a});
        cnf.clauses.push_back({-o, b});
        cnf.clauses.push_back({o, -a, -b});
        cnf.defines.resize(cnf.clauses.size(), o);
        lit[i] = o;
        break;
      }
      case GateKind::or_: {
        const Lit o = ++cnf.num_vars, a = lit[g.a], b = lit[g.b];
        cnf.clauses.push_back({o, -a});
        cnf.clauses.push_back({o, -b});
        cnf.clauses.push_back({-o, a, b});
        cnf.defines.resize(cnf.clauses.size(), o);
        lit[i] = o;
        break;
      }
      case GateKind::xor_: {
        const Lit o = ++cnf.num_vars, a = lit[g.a], b = lit[g.b];
        cnf.clauses.push_back({-o, a, b});
        cnf.clauses.push_back({-o, -a, -b});
        cnf.clauses.push_back({o, -a, b});
        cnf.clauses.push_back({o, a, -b});
        cnf.defines.resize(cnf.clauses.size(), o);
        lit[i] = o;
        break;
      }
    }
  }
  if (circuit.constant_value(circuit.domain_constraint()) != true)
    cnf.clauses.push_back({lit[circuit.domain_constraint().id]});
  cnf.defines.resize(cnf.clauses.size(), 0);
  if (circuit.constant_value(root) != true) {
    cnf.root_literal = lit[root.id];
    cnf.clauses.push_back({cnf.root_literal});
    cnf.defines.push_back(0);
  }
  return cnf;
}

DimacsDialect parse_dialect(std::string_view name) {
  if (name == "ind" || name == "ind_comment") return DimacsDialect::ind_comment;
  if (name == "pshow" || name == "pshow_comment") return DimacsDialect::pshow_comment;
  throw InputError("unknown DIMACS dialect '" + std::string(name) + "' (use ind or pshow)");
}

std::string emit_dimacs(const CnfFormula& cnf, DimacsDialect dialect) {
  std::ostringstream out;
  out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
  if (dialect == DimacsDialect::ind_comment) {
    std::size_t i = 0;
    do {
      out << "c ind";
      for (std::size_t k = 0; k < 10 && i < cnf.projection.size(); ++k, ++i) out << " " << cnf.projection[i];
      out << " 0\n";
    } while (i < cnf.projection.size());
  } else {
    out << "c p show";
    for (int v : cnf.projection) out << " " << v;
    out << " 0\n";
  }
  for (const auto& clause : cnf.clauses) {
    for (Lit l : clause) out << l << " ";
    out << "0\n";
  }
  return out.str();
}

namespace {

bool parse_int(std::string_view tok, long long& v) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

CnfFormula parse_dimacs(std::string_view text) {
  CnfFormula cnf;
  bool have_header = false;
  long long declared_clauses = 0;
  bool have_projection = false;
  std::set<int> projection;
  std::vector<Lit> current;
  std::size_t line_no = 0;

  auto projection_vars = [&](const std::vector<std::string_view>& toks, std::size_t first) {
    have_projection = true;
    bool terminated = false;
    for (std::size_t k = first; k < toks.size(); ++k) {
      long long v = 0;
      if (!parse_int(toks[k], v)) throw InputError("line " + std::to_string(line_no) + ": bad projection variable");
      if (v == 0) {
        terminated = true;
        break;
      }
      if (v < 0) throw InputError("line " + std::to_string(line_no) + ": negative projection variable");
      projection.insert(static_cast<int>(v));
    }
    if (!terminated) throw InputError("line " + std::to_string(line_no) + ": unterminated projection line");
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "c") {
      if (toks.size() >= 2 && toks[1] == "ind") projection_vars(toks, 2);
      else if (toks.size() >= 3 && toks[1] == "p" && toks[2] == "show") projection_vars(toks, 3);
      continue;
    }
    if (toks[0] == "p") {
      long long v = 0, c = 0;
      if (have_header || toks.size() != 4 || toks[1] != "cnf" || !parse_int(toks[2], v) ||
          !parse_int(toks[3], c) || v < 0 || c < 0)
        throw InputError("line " + std::to_string(line_no) + ": malformed header");
      have_header = true;
      cnf.num_vars = static_cast<int>(v);
      declared_clauses = c;
      continue;
    }
    if (toks[0] == "%") break;  // SATLIB trailer
    if (!have_header) throw InputError("line " + std::to_string(line_no) + ": clause before header");
    for (auto tok : toks) {
      long long v = 0;
      if (!parse_int(tok, v)) throw InputError("line " + std::to_string(line_no) + ": bad literal '" + std::string(tok) + "'");
      if (v == 0) {
        if (current.empty()) throw InputError("line " + std::to_string(line_no) + ": empty clause");
        cnf.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      if (std::llabs(v) > cnf.num_vars)
        throw InputError("line " + std::to_string(line_no) + ": literal out of range (" + std::string(tok) + ")");
      current.push_back(static_cast<Lit>(v));
    }
  }
  if (!have_header) throw InputError("missing 'p cnf' header");
  if (!current.empty()) throw InputError("unterminated clause at end of input");
  if (static_cast<long long>(cnf.clauses.size()) != declared_clauses)
    throw InputError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                     std::to_string(cnf.clauses.size()));
  if (have_projection) {
    for (int v : projection)
      if (v > cnf.num_vars) throw InputError("projection variable out of range: " + std::to_string(v));
    cnf.projection.assign(projection.begin(), projection.end());
  } else {
    for (int v = 1; v <= cnf.num_vars; ++v) cnf.projection.push_back(v);
  }
  return cnf;
}

}  // namespace exactml
