#include "exactml/sat.hpp"

#include <algorithm>

#include "exactml/error.hpp"

namespace exactml {

void CdclSolver::reserve_vars(int n) {
  if (n <= num_vars_) return;
  const auto size = static_cast<std::size_t>(n) + 1;
  assign_.resize(size, 0);
  level_of_.resize(size, 0);
  reason_.resize(size, -1);
  phase_.resize(size, false);
  activity_.resize(size, 0.0);
  heap_pos_.resize(size, -1);
  seen_.resize(size, false);
  watches_.resize(2 * size);
  const int old = num_vars_;
  num_vars_ = n;
  for (int v = old + 1; v <= n; ++v) heap_insert(v);
}

void CdclSolver::add_clause(std::span<const Lit> clause) {
  backtrack(0);
  if (unsat_) return;
  int top = 0;
  for (Lit l : clause) {
    if (l == 0) throw InputError("literal 0 in clause");
    top = std::max(top, std::abs(l));
  }
  reserve_vars(top);
  std::vector<Code> c;
  for (Lit l : clause) {
    const Code x = code(l);
    if (value(x) == 1) return;
    if (value(x) == -1) continue;
    if (std::find(c.begin(), c.end(), neg(x)) != c.end()) return;
    if (std::find(c.begin(), c.end(), x) == c.end()) c.push_back(x);
  }
  if (c.empty()) {
    unsat_ = true;
    return;
  }
  if (c.size() == 1) {
    enqueue(c[0], -1);
    if (propagate() != -1) unsat_ = true;
    return;
  }
  attach(std::move(c));
}

int CdclSolver::attach(std::vector<Code> clause) {
  const int index = static_cast<int>(clauses_.size());
  watches_[clause[0]].push_back(index);
  watches_[clause[1]].push_back(index);
  clauses_.push_back(std::move(clause));
  return index;
}

void CdclSolver::enqueue(Code c, int reason) {
  const auto v = static_cast<std::size_t>(var(c));
  assign_[v] = (c & 1u) ? -1 : 1;
  level_of_[v] = level();
  reason_[v] = reason;
  trail_.push_back(c);
}

int CdclSolver::propagate() {
  while (qhead_ < trail_.size()) {
    const Code falsified = neg(trail_[qhead_++]);
    auto& ws = watches_[falsified];
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const int ci = ws[i++];
      auto& c = clauses_[static_cast<std::size_t>(ci)];
      if (c[0] == falsified) std::swap(c[0], c[1]);
      if (value(c[0]) == 1) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != -1) {
          std::swap(c[1], c[k]);
          watches_[c[1]].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (value(c[0]) == -1) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return ci;
      }
      enqueue(c[0], ci);
    }
    ws.resize(j);
  }
  return -1;
}

void CdclSolver::analyze(int conflict, std::vector<Code>& learnt, int& backjump) {
  learnt.assign(1, 0);
  int pending = 0;
  bool have_pivot = false;
  Code pivot = 0;
  std::size_t index = trail_.size();
  int ci = conflict;
  do {
    const auto& c = clauses_[static_cast<std::size_t>(ci)];
    for (std::size_t k = have_pivot ? 1 : 0; k < c.size(); ++k) {
      const Code q = c[k];
      const auto v = static_cast<std::size_t>(var(q));
      if (seen_[v] || level_of_[v] == 0) continue;
      seen_[v] = true;
      bump(static_cast<int>(v));
      if (level_of_[v] >= level()) ++pending;
      else learnt.push_back(q);
    }
    do {
      --index;
    } while (!seen_[static_cast<std::size_t>(var(trail_[index]))]);
    pivot = trail_[index];
    have_pivot = true;
    const auto pv = static_cast<std::size_t>(var(pivot));
    ci = reason_[pv];
    seen_[pv] = false;
    --pending;
  } while (pending > 0);
  learnt[0] = neg(pivot);

  backjump = 0;
  std::size_t best = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    const int lv = level_of_[static_cast<std::size_t>(var(learnt[k]))];
    if (lv > backjump) {
      backjump = lv;
      best = k;
    }
  }
  if (learnt.size() > 1) std::swap(learnt[1], learnt[best]);
  for (Code q : learnt) seen_[static_cast<std::size_t>(var(q))] = false;
}

void CdclSolver::backtrack(int target) {
  if (level() <= target) return;
  const std::size_t keep = trail_lim_[static_cast<std::size_t>(target)];
  for (std::size_t i = trail_.size(); i-- > keep;) {
    const auto v = static_cast<std::size_t>(var(trail_[i]));
    phase_[v] = assign_[v] > 0;
    assign_[v] = 0;
    reason_[v] = -1;
    if (heap_pos_[v] < 0) heap_insert(static_cast<int>(v));
  }
  trail_.resize(keep);
  trail_lim_.resize(static_cast<std::size_t>(target));
  qhead_ = trail_.size();
}

void CdclSolver::bump(int v) {
  auto& a = activity_[static_cast<std::size_t>(v)];
  a += bump_amount_;
  if (a > 1e100) {
    for (auto& x : activity_) x *= 1e-100;
    bump_amount_ *= 1e-100;
  }
  if (heap_pos_[static_cast<std::size_t>(v)] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[static_cast<std::size_t>(v)]));
}

namespace {

bool before(const std::vector<double>& act, int a, int b) {
  const double x = act[static_cast<std::size_t>(a)], y = act[static_cast<std::size_t>(b)];
  return x > y || (x == y && a < b);
}

}  // namespace

void CdclSolver::heap_up(std::size_t i) {
  const int v = heap_[i];
  while (i > 0) {
    std::size_t parent = (i - 1) / 2;
    if (!before(activity_, v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
}

void CdclSolver::heap_down(std::size_t i) {
  const int v = heap_[i];
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() && before(activity_, heap_[child + 1], heap_[child])) ++child;
    if (!before(activity_, heap_[child], v)) break;
    heap_[i] = heap_[child];
    heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
}

void CdclSolver::heap_insert(int v) {
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

int CdclSolver::heap_pop() {
  const int top = heap_.front();
  heap_pos_[static_cast<std::size_t>(top)] = -1;
  heap_.front() = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_pos_[static_cast<std::size_t>(heap_.front())] = 0;
    heap_down(0);
  }
  return top;
}

int CdclSolver::pick_branch() {
  while (!heap_.empty()) {
    const int v = heap_pop();
    if (assign_[static_cast<std::size_t>(v)] == 0) return v;
  }
  return 0;
}

std::optional<std::vector<bool>> CdclSolver::solve() {
  if (unsat_) return std::nullopt;
  backtrack(0);
  std::vector<Code> learnt;
  for (;;) {
    const int conflict = propagate();
    if (conflict >= 0) {
      ++conflicts_;
      if (level() == 0) {
        unsat_ = true;
        return std::nullopt;
      }
      int backjump = 0;
      analyze(conflict, learnt, backjump);
      backtrack(backjump);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        const Code asserting = learnt[0];
        const int index = attach(learnt);
        enqueue(asserting, index);
      }
      bump_amount_ /= 0.95;
      continue;
    }
    const int v = pick_branch();
    if (v == 0) {
      std::vector<bool> model(static_cast<std::size_t>(num_vars_) + 1, false);
      for (int u = 1; u <= num_vars_; ++u) model[static_cast<std::size_t>(u)] = assign_[static_cast<std::size_t>(u)] > 0;
      return model;
    }
    trail_lim_.push_back(trail_.size());
    ++decisions_;
    enqueue(code(phase_[static_cast<std::size_t>(v)] ? v : -v), -1);
  }
}

}  // namespace exactml
