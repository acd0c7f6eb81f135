#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "exactml/circuit.hpp"

namespace exactml {

using Lit = int;  // DIMACS literal: +v / -v, v >= 1

struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<Lit>> clauses;
  // Sorted, 1-based. For tseitin output: variables 1..num_inputs.
  std::vector<int> projection;
  // Literal asserting the encoded root; 0 for a constant-true root or parsed DIMACS.
  Lit root_literal = 0;
  // Optional gate structure, parallel to `clauses`: the auxiliary variable a
  // clause helps define, or 0 for a constraint. Empty when unknown. Counters
  // may rely on it, so every defined variable must be a total function of
  // earlier variables through exactly its defining clauses.
  std::vector<int> defines;

  // Throws InputError on an empty clause, a zero literal, or a variable out of range.
  void validate() const;
  std::size_t num_literals() const;
};

// Full biconditional encoding of the gates reachable from `root` and from the
// domain constraint. Input bit i becomes variable i + 1 (feature order, low
// bit first); remaining gates follow in topological order. NOT gates reuse
// their operand's variable with flipped sign. The root and the domain
// constraint are asserted by unit clauses.
CnfFormula tseitin(const Circuit& circuit, Wire root);

enum class DimacsDialect {
  ind_comment,    // "c ind v1 v2 ... 0", at most 10 variables per line
  pshow_comment,  // "c p show v1 ... 0", one line
};

DimacsDialect parse_dialect(std::string_view name);  // "ind" | "pshow"

std::string emit_dimacs(const CnfFormula& cnf, DimacsDialect dialect);
// Without projection comments the projection is every variable.
CnfFormula parse_dimacs(std::string_view text);

}  // namespace exactml
