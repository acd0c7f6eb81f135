#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exactml/bigint.hpp"
#include "exactml/cnf.hpp"
#include "exactml/sat.hpp"

namespace exactml {

enum class CountMethod { dpll_projected, enumeration, external };
enum class CountStatus { exact, budget_exhausted };

struct CountStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  double wall_seconds = 0.0;
};

struct CountResult {
  CountStatus status = CountStatus::exact;
  BigInt count;  // meaningful only when status == exact
  CountMethod method = CountMethod::dpll_projected;
  CountStats stats;
  // Verbatim count expression reported by an external tool, e.g. "8*2^9".
  std::string external_form;

  bool exact() const { return status == CountStatus::exact; }
};

struct CounterOptions {
  std::uint64_t decision_budget = 0;  // 0 = unlimited
  bool components = true;
};

// Exact count of projection assignments that extend to a model. Branches only
// on projection variables; auxiliary-only residual components are decided by
// a satisfiability search, so the count is exact for any CNF.
CountResult count_projected(const CnfFormula& cnf, const CounterOptions& options = {});

struct EnumerateOptions {
  std::size_t max_projection = 24;
  std::uint64_t decision_budget = 0;  // 0 = unlimited
};

// Blocking-clause enumeration over projection variables. Throws CapExceeded
// when the projection is larger than max_projection.
CountResult count_enumerate(const CnfFormula& cnf, SatOracle& solver, const EnumerateOptions& options = {});
CountResult count_enumerate(const CnfFormula& cnf, const EnumerateOptions& options = {});

enum class ExternalTool { projected_exact, approximate };

// Recognizes "s mc N", "s pmc N", "c s exact arb int N", "s UNSATISFIABLE",
// sharpSAT's "# solutions" block, and approximate "a*2^b" forms.
CountResult parse_external_count(std::string_view text, ExternalTool tool);

// Watched-literal unit propagation over a fixed formula, exposed for checking
// that Tseitin auxiliaries are functionally determined by the projection.
class Propagator {
 public:
  explicit Propagator(const CnfFormula& cnf);

  // False on conflict. Assignments accumulate; there is no backtracking.
  bool assign(Lit lit);
  bool propagate();
  bool conflict() const { return conflict_; }
  // 1 true, -1 false, 0 unassigned
  int value(int var) const { return values_.at(static_cast<std::size_t>(var)); }
  int num_unassigned() const;
  std::uint64_t propagations() const { return propagations_; }

 private:
  struct Clause {
    std::vector<Lit> lits;
  };
  std::size_t slot(Lit l) const { return static_cast<std::size_t>(2 * std::abs(l) + (l < 0 ? 1 : 0)); }
  int lit_value(Lit l) const { return l > 0 ? values_[static_cast<std::size_t>(l)] : -values_[static_cast<std::size_t>(-l)]; }

  int num_vars_;
  std::vector<Clause> clauses_;
  std::vector<std::vector<std::size_t>> watches_;
  std::vector<int> values_;
  std::vector<Lit> trail_;
  std::size_t qhead_ = 0;
  bool conflict_ = false;
  std::uint64_t propagations_ = 0;
};

}  // namespace exactml
