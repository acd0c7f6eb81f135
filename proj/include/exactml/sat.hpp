#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "exactml/cnf.hpp"

namespace exactml {

// Incremental satisfiability oracle. Models are indexed by variable (index 0 unused).
class SatOracle {
 public:
  virtual ~SatOracle() = default;
  virtual void reserve_vars(int num_vars) = 0;
  virtual void add_clause(std::span<const Lit> clause) = 0;
  virtual std::optional<std::vector<bool>> solve() = 0;
  virtual std::uint64_t decisions() const = 0;
};

// Conflict-driven clause learning: two watched literals, first-UIP learning,
// activity-ordered decisions with phase saving. No restarts or clause
// deletion, so runs are deterministic.
class CdclSolver final : public SatOracle {
 public:
  void reserve_vars(int num_vars) override;
  void add_clause(std::span<const Lit> clause) override;
  std::optional<std::vector<bool>> solve() override;
  std::uint64_t decisions() const override { return decisions_; }
  std::uint64_t conflicts() const { return conflicts_; }

 private:
  using Code = std::uint32_t;  // 2 * var + (negative ? 1 : 0)
  static Code code(Lit l) { return static_cast<Code>(2 * std::abs(l) + (l < 0 ? 1 : 0)); }
  static Code neg(Code c) { return c ^ 1u; }
  static int var(Code c) { return static_cast<int>(c >> 1); }

  // 1 true, -1 false, 0 unassigned
  int value(Code c) const {
    const int v = assign_[static_cast<std::size_t>(var(c))];
    return (c & 1u) ? -v : v;
  }
  void enqueue(Code c, int reason);
  int propagate();  // conflicting clause index or -1
  void analyze(int conflict, std::vector<Code>& learnt, int& backjump);
  void backtrack(int level);
  int attach(std::vector<Code> clause);
  int pick_branch();
  void bump(int v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  void heap_insert(int v);
  int heap_pop();
  int level() const { return static_cast<int>(trail_lim_.size()); }

  int num_vars_ = 0;
  bool unsat_ = false;
  std::vector<std::vector<Code>> clauses_;
  std::vector<std::vector<int>> watches_;  // by literal code
  std::vector<int> assign_;
  std::vector<int> level_of_;
  std::vector<int> reason_;
  std::vector<bool> phase_;
  std::vector<double> activity_;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<bool> seen_;
  std::vector<Code> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  double bump_amount_ = 1.0;
  std::uint64_t decisions_ = 0;
  std::uint64_t conflicts_ = 0;
};

}  // namespace exactml
