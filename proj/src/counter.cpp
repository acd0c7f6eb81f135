#include "exactml/counter.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <regex>

#include "exactml/error.hpp"

namespace exactml {

// ---------------------------------------------------------------------------
// Propagator

Propagator::Propagator(const CnfFormula& cnf)
    : num_vars_(cnf.num_vars),
      watches_(2 * (static_cast<std::size_t>(cnf.num_vars) + 1)),
      values_(static_cast<std::size_t>(cnf.num_vars) + 1, 0) {
  cnf.validate();
  for (const auto& c : cnf.clauses) {
    if (c.size() == 1) {
      if (!assign(c[0])) return;
      continue;
    }
    const std::size_t index = clauses_.size();
    clauses_.push_back({c});
    watches_[slot(c[0])].push_back(index);
    watches_[slot(c[1])].push_back(index);
  }
}

bool Propagator::assign(Lit lit) {
  if (conflict_) return false;
  const int v = lit_value(lit);
  if (v == 1) return true;
  if (v == -1) {
    conflict_ = true;
    return false;
  }
  values_[static_cast<std::size_t>(std::abs(lit))] = lit > 0 ? 1 : -1;
  trail_.push_back(lit);
  return true;
}

bool Propagator::propagate() {
  while (!conflict_ && qhead_ < trail_.size()) {
    const Lit falsified = -trail_[qhead_++];
    auto& ws = watches_[slot(falsified)];
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const std::size_t ci = ws[i++];
      auto& c = clauses_[ci].lits;
      if (c[0] == falsified) std::swap(c[0], c[1]);
      if (lit_value(c[0]) == 1) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (lit_value(c[k]) != -1) {
          std::swap(c[1], c[k]);
          watches_[slot(c[1])].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      ++propagations_;
      if (!assign(c[0])) {
        while (i < ws.size()) ws[j++] = ws[i++];
        break;
      }
    }
    ws.resize(j);
  }
  return !conflict_;
}

int Propagator::num_unassigned() const {
  int n = 0;
  for (int v = 1; v <= num_vars_; ++v) n += values_[static_cast<std::size_t>(v)] == 0;
  return n;
}

// ---------------------------------------------------------------------------
// Projected DPLL counter

namespace {

struct BudgetExhausted {};

class ProjectedCounter {
 public:
  ProjectedCounter(const CnfFormula& cnf, const CounterOptions& options)
      : options_(options),
        num_vars_(cnf.num_vars),
        is_projection_(static_cast<std::size_t>(cnf.num_vars) + 1, false),
        values_(static_cast<std::size_t>(cnf.num_vars) + 1, 0),
        watches_(2 * (static_cast<std::size_t>(cnf.num_vars) + 1)),
        parent_(static_cast<std::size_t>(cnf.num_vars) + 1),
        stamp_(static_cast<std::size_t>(cnf.num_vars) + 1, 0),
        score_(static_cast<std::size_t>(cnf.num_vars) + 1, 0) {
    for (int v : cnf.projection) is_projection_[static_cast<std::size_t>(v)] = true;
    for (std::size_t ci = 0; ci < cnf.clauses.size(); ++ci) {
      const auto& c = cnf.clauses[ci];
      // Duplicate literals would break the watch invariant; tautologies never constrain.
      std::vector<Lit> lits;
      bool tautology = false;
      for (Lit l : c) {
        if (std::find(lits.begin(), lits.end(), -l) != lits.end()) tautology = true;
        if (std::find(lits.begin(), lits.end(), l) == lits.end()) lits.push_back(l);
      }
      if (tautology) continue;
      if (lits.size() == 1) {
        units_.push_back(lits[0]);
        continue;
      }
      const auto index = static_cast<std::uint32_t>(starts_.size());
      starts_.push_back(static_cast<std::uint32_t>(lits_.size()));
      sizes_.push_back(static_cast<std::uint32_t>(lits.size()));
      defines_.push_back(cnf.defines.empty() ? 0 : cnf.defines[ci]);
      lits_.insert(lits_.end(), lits.begin(), lits.end());
      watches_[slot(lits[0])].push_back(index);
      watches_[slot(lits[1])].push_back(index);
    }
  }

  BigInt run() {
    for (Lit u : units_)
      if (!enqueue(u)) return 0;
    if (!propagate()) return 0;
    std::vector<std::uint32_t> all(starts_.size());
    std::iota(all.begin(), all.end(), 0u);
    std::vector<int> vars;
    for (int v = 1; v <= num_vars_; ++v)
      if (values_[static_cast<std::size_t>(v)] == 0) vars.push_back(v);
    return count_residual(all, vars);
  }

  std::uint64_t decisions() const { return decisions_; }
  std::uint64_t propagations() const { return propagations_; }

 private:
  std::size_t slot(Lit l) const { return static_cast<std::size_t>(2 * std::abs(l) + (l < 0 ? 1 : 0)); }
  int lit_value(Lit l) const {
    return l > 0 ? values_[static_cast<std::size_t>(l)] : -values_[static_cast<std::size_t>(-l)];
  }
  Lit* clause(std::uint32_t c) { return lits_.data() + starts_[c]; }

  bool enqueue(Lit l) {
    const int v = lit_value(l);
    if (v != 0) return v == 1;
    values_[static_cast<std::size_t>(std::abs(l))] = l > 0 ? 1 : -1;
    trail_.push_back(l);
    return true;
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const Lit falsified = -trail_[qhead_++];
      auto& ws = watches_[slot(falsified)];
      std::size_t i = 0, j = 0;
      bool ok = true;
      while (i < ws.size()) {
        const std::uint32_t ci = ws[i++];
        Lit* c = clause(ci);
        const std::uint32_t n = sizes_[ci];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (lit_value(c[0]) == 1) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (std::uint32_t k = 2; k < n; ++k) {
          if (lit_value(c[k]) != -1) {
            std::swap(c[1], c[k]);
            watches_[slot(c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        ++propagations_;
        if (!enqueue(c[0])) {
          ok = false;
          while (i < ws.size()) ws[j++] = ws[i++];
          break;
        }
      }
      ws.resize(j);
      if (!ok) {
        qhead_ = trail_.size();
        return false;
      }
    }
    return true;
  }

  void backtrack(std::size_t trail_size) {
    for (std::size_t i = trail_.size(); i-- > trail_size;) values_[static_cast<std::size_t>(std::abs(trail_[i]))] = 0;
    trail_.resize(trail_size);
    qhead_ = trail_size;
  }

  void decide() {
    ++decisions_;
    if (options_.decision_budget != 0 && decisions_ > options_.decision_budget) throw BudgetExhausted{};
  }

  bool satisfied(std::uint32_t ci) const {
    const Lit* c = lits_.data() + starts_[ci];
    for (std::uint32_t k = 0; k < sizes_[ci]; ++k)
      if (lit_value(c[k]) == 1) return true;
    return false;
  }

  int find_root(int v) {
    auto p = static_cast<std::size_t>(v);
    while (parent_[p] != static_cast<int>(p)) {
      parent_[p] = parent_[static_cast<std::size_t>(parent_[p])];
      p = static_cast<std::size_t>(parent_[p]);
    }
    return static_cast<int>(p);
  }

  struct Component {
    std::vector<std::uint32_t> clauses;
    std::vector<int> vars;
    bool has_projection = false;
  };

  // Count of the residual problem given by `clauses` over `vars` under the
  // current (propagated, conflict-free) assignment.
  BigInt count_residual(const std::vector<std::uint32_t>& clauses, const std::vector<int>& vars) {
    std::vector<std::uint32_t> active;
    for (std::uint32_t ci : clauses)
      if (!satisfied(ci)) active.push_back(ci);

    ++epoch_;
    for (std::uint32_t ci : active) {
      const Lit* c = clause(ci);
      for (std::uint32_t k = 0; k < sizes_[ci]; ++k) {
        const auto v = static_cast<std::size_t>(std::abs(c[k]));
        if (values_[v] != 0 || stamp_[v] == epoch_) continue;
        stamp_[v] = epoch_;
        parent_[v] = static_cast<int>(v);
      }
    }
    std::size_t free_projection = 0;
    for (int v : vars) {
      const auto u = static_cast<std::size_t>(v);
      if (values_[u] == 0 && stamp_[u] != epoch_ && is_projection_[u]) ++free_projection;
    }

    std::vector<Component> parts;
    if (options_.components) {
      for (std::uint32_t ci : active) {
        const Lit* c = clause(ci);
        int first = 0;
        for (std::uint32_t k = 0; k < sizes_[ci]; ++k) {
          const int v = std::abs(c[k]);
          if (values_[static_cast<std::size_t>(v)] != 0) continue;
          if (first == 0) {
            first = find_root(v);
            continue;
          }
          const int r = find_root(v);
          if (r != first) parent_[static_cast<std::size_t>(r)] = first;
        }
      }
      std::vector<std::pair<int, std::size_t>> index_of;  // root -> part
      auto part_for = [&](int root) -> Component& {
        for (auto& [r, i] : index_of)
          if (r == root) return parts[i];
        index_of.emplace_back(root, parts.size());
        return parts.emplace_back();
      };
      // Small linear map keeps ordering deterministic; switch to a table when large.
      if (active.size() > 64) {
        std::vector<int> slot_of(static_cast<std::size_t>(num_vars_) + 1, -1);
        for (std::uint32_t ci : active) {
          const int r = find_root(first_unassigned(ci));
          auto& s = slot_of[static_cast<std::size_t>(r)];
          if (s < 0) {
            s = static_cast<int>(parts.size());
            parts.emplace_back();
          }
          parts[static_cast<std::size_t>(s)].clauses.push_back(ci);
        }
        for (int v : vars) {
          const auto u = static_cast<std::size_t>(v);
          if (values_[u] != 0 || stamp_[u] != epoch_) continue;
          auto& part = parts[static_cast<std::size_t>(slot_of[static_cast<std::size_t>(find_root(v))])];
          part.vars.push_back(v);
          part.has_projection = part.has_projection || is_projection_[u];
        }
      } else {
        for (std::uint32_t ci : active) part_for(find_root(first_unassigned(ci))).clauses.push_back(ci);
        for (int v : vars) {
          const auto u = static_cast<std::size_t>(v);
          if (values_[u] != 0 || stamp_[u] != epoch_) continue;
          auto& part = part_for(find_root(v));
          part.vars.push_back(v);
          part.has_projection = part.has_projection || is_projection_[u];
        }
      }
    } else if (!active.empty()) {
      Component all;
      all.clauses = std::move(active);
      for (int v : vars) {
        const auto u = static_cast<std::size_t>(v);
        if (values_[u] != 0 || stamp_[u] != epoch_) continue;
        all.vars.push_back(v);
        all.has_projection = all.has_projection || is_projection_[u];
      }
      parts.push_back(std::move(all));
    }

    BigInt total = pow2(free_projection);
    for (const auto& part : parts) {
      if (only_open_definitions(part)) {
        // Any assignment of its projection variables extends by evaluating the gates.
        std::size_t k = 0;
        for (int v : part.vars) k += is_projection_[static_cast<std::size_t>(v)];
        total *= pow2(k);
        continue;
      }
      BigInt sub = part.has_projection ? branch(part) : BigInt(satisfiable(part) ? 1 : 0);
      if (sub == 0) return 0;
      total *= sub;
    }
    return total;
  }

  // True when every open clause belongs to the definition of a gate whose
  // output is still unassigned.
  bool only_open_definitions(const Component& part) const {
    for (std::uint32_t ci : part.clauses) {
      const int d = defines_[ci];
      if (d != 0 && values_[static_cast<std::size_t>(d)] == 0) continue;
      if (!satisfied(ci)) return false;
    }
    return true;
  }

  int first_unassigned(std::uint32_t ci) {
    const Lit* c = clause(ci);
    for (std::uint32_t k = 0; k < sizes_[ci]; ++k)
      if (values_[static_cast<std::size_t>(std::abs(c[k]))] == 0) return std::abs(c[k]);
    return 0;
  }

  // Most occurrences in the shortest clauses that mention a projection variable.
  int pick(const Component& part) {
    std::uint32_t shortest = ~0u;
    for (std::uint32_t ci : part.clauses) {
      const Lit* c = clause(ci);
      std::uint32_t len = 0;
      bool proj = false;
      for (std::uint32_t k = 0; k < sizes_[ci]; ++k) {
        const auto v = static_cast<std::size_t>(std::abs(c[k]));
        if (values_[v] != 0) continue;
        ++len;
        proj = proj || is_projection_[v];
      }
      if (proj && len < shortest) shortest = len;
    }
    for (int v : part.vars) score_[static_cast<std::size_t>(v)] = 0;
    for (std::uint32_t ci : part.clauses) {
      const Lit* c = clause(ci);
      std::uint32_t len = 0;
      for (std::uint32_t k = 0; k < sizes_[ci]; ++k) len += values_[static_cast<std::size_t>(std::abs(c[k]))] == 0;
      if (len != shortest) continue;
      for (std::uint32_t k = 0; k < sizes_[ci]; ++k) {
        const auto v = static_cast<std::size_t>(std::abs(c[k]));
        if (values_[v] == 0 && is_projection_[v]) ++score_[v];
      }
    }
    int best = 0;
    for (int v : part.vars) {  // vars are ascending
      const auto u = static_cast<std::size_t>(v);
      if (!is_projection_[u] || values_[u] != 0) continue;
      if (best == 0 || score_[u] > score_[static_cast<std::size_t>(best)]) best = v;
    }
    return best;
  }

  BigInt branch(const Component& part) {
    std::vector<int> open;
    for (int v : part.vars)
      if (is_projection_[static_cast<std::size_t>(v)] && values_[static_cast<std::size_t>(v)] == 0) open.push_back(v);
    if (open.size() <= kTailVars) return count_tail(part, open, 0);
    const int v = pick(part);
    BigInt total = 0;
    const std::size_t mark = trail_.size();
    for (Lit l : {-v, v}) {
      decide();
      enqueue(l);
      if (propagate()) total += count_residual(part.clauses, part.vars);
      backtrack(mark);
    }
    return total;
  }

  // Few projection variables left: their assignments are walked in order with
  // propagation only, skipping the per-node component analysis.
  static constexpr std::size_t kTailVars = 8;

  BigInt count_tail(const Component& part, const std::vector<int>& open, std::size_t next) {
    while (next < open.size() && values_[static_cast<std::size_t>(open[next])] != 0) ++next;
    if (next == open.size()) {
      for (int v : part.vars)
        if (values_[static_cast<std::size_t>(v)] == 0)
          return only_open_definitions(part) || satisfiable(part) ? 1 : 0;
      return 1;  // fully assigned without conflict
    }
    BigInt total = 0;
    const std::size_t mark = trail_.size();
    for (Lit l : {-open[next], open[next]}) {
      decide();
      enqueue(l);
      if (propagate()) total += count_tail(part, open, next + 1);
      backtrack(mark);
    }
    return total;
  }

  // Plain DPLL over auxiliary variables.
  bool satisfiable(const Component& part) {
    int v = 0;
    for (std::uint32_t ci : part.clauses) {
      if (satisfied(ci)) continue;
      v = first_unassigned(ci);
      if (v != 0) break;
    }
    if (v == 0) return true;
    const std::size_t mark = trail_.size();
    for (Lit l : {-v, v}) {
      decide();
      enqueue(l);
      bool ok = propagate() && satisfiable(part);
      backtrack(mark);
      if (ok) return true;
    }
    return false;
  }

  CounterOptions options_;
  int num_vars_;
  std::vector<bool> is_projection_;
  std::vector<int> values_;
  std::vector<Lit> lits_;
  std::vector<std::uint32_t> starts_;
  std::vector<std::uint32_t> sizes_;
  std::vector<int> defines_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<Lit> units_;
  std::vector<Lit> trail_;
  std::size_t qhead_ = 0;
  std::vector<int> parent_;
  std::vector<std::uint64_t> stamp_;
  std::vector<std::uint32_t> score_;
  std::uint64_t epoch_ = 0;
  std::uint64_t decisions_ = 0;
  std::uint64_t propagations_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CountResult count_projected(const CnfFormula& cnf, const CounterOptions& options) {
  cnf.validate();
  const auto start = std::chrono::steady_clock::now();
  ProjectedCounter counter(cnf, options);
  CountResult result;
  result.method = CountMethod::dpll_projected;
  try {
    result.count = counter.run();
  } catch (const BudgetExhausted&) {
    result.status = CountStatus::budget_exhausted;
    result.count = 0;
  }
  result.stats.decisions = counter.decisions();
  result.stats.propagations = counter.propagations();
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

CountResult count_enumerate(const CnfFormula& cnf, SatOracle& solver, const EnumerateOptions& options) {
  cnf.validate();
  if (cnf.projection.size() > options.max_projection)
    throw CapExceeded("projection has " + std::to_string(cnf.projection.size()) +
                      " variables, enumeration cap is " + std::to_string(options.max_projection));
  const auto start = std::chrono::steady_clock::now();
  CountResult result;
  result.method = CountMethod::enumeration;
  result.count = 0;
  solver.reserve_vars(cnf.num_vars);
  for (const auto& c : cnf.clauses) solver.add_clause(c);
  std::vector<Lit> blocking;
  for (;;) {
    auto model = solver.solve();
    if (options.decision_budget != 0 && solver.decisions() > options.decision_budget) {
      result.status = CountStatus::budget_exhausted;
      break;
    }
    if (!model) break;
    ++result.count;
    if (cnf.projection.empty()) break;
    blocking.clear();
    for (int v : cnf.projection) blocking.push_back((*model)[static_cast<std::size_t>(v)] ? -v : v);
    solver.add_clause(blocking);
  }
  result.stats.decisions = solver.decisions();
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

CountResult count_enumerate(const CnfFormula& cnf, const EnumerateOptions& options) {
  CdclSolver solver;
  return count_enumerate(cnf, solver, options);
}

CountResult parse_external_count(std::string_view text, ExternalTool tool) {
  CountResult result;
  result.method = CountMethod::external;
  const std::string s(text);
  std::smatch m;
  static const std::regex approx_form(R"((\d+)\s*\*\s*2\s*\^\s*(\d+))");
  static const std::regex mc_line(R"((?:^|\n)\s*s\s+p?mc\s+(\S+))");
  static const std::regex exact_arb(R"((?:^|\n)\s*c\s+s\s+exact\s+arb\s+int\s+(\d+))");
  static const std::regex sharpsat(R"(#\s*solutions\s*\n\s*(\d+))");
  static const std::regex approx_line(R"(Number of solutions is:\s*(\S+))");
  static const std::regex unsat(R"((?:^|\n)\s*s\s+UNSATISFIABLE)");

  auto set_value = [&](const std::string& token) {
    std::smatch a;
    if (std::regex_match(token, a, approx_form)) {
      result.count = BigInt(a[1].str()) * pow2(std::stoul(a[2].str()));
      result.external_form = token;
      return true;
    }
    if (!token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      result.count = BigInt(token);
      result.external_form = token;
      return true;
    }
    return false;
  };

  if (std::regex_search(s, m, exact_arb) && set_value(m[1].str())) return result;
  if (std::regex_search(s, m, mc_line) && set_value(m[1].str())) return result;
  if (std::regex_search(s, m, sharpsat) && set_value(m[1].str())) return result;
  if (tool == ExternalTool::approximate && std::regex_search(s, m, approx_line) && set_value(m[1].str()))
    return result;
  if (std::regex_search(s, m, unsat)) {
    result.count = 0;
    result.external_form = "UNSATISFIABLE";
    return result;
  }
  throw InputError("unrecognized counter output");
}

}  // namespace exactml
