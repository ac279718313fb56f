#include "invsynth/sat.hpp"

#include <algorithm>
#include <cmath>

#include "invsynth/rng.hpp"

namespace invsynth::sat {

namespace {

double luby(double y, std::uint64_t x) {
  std::uint64_t size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

Solver::Solver(std::uint64_t seed, bool random_phase)
    : rng_(mix64(seed ^ 0x5A17ED5EEDull)), random_phase_(random_phase) {}

Var Solver::new_var() {
  const Var v = static_cast<Var>(assigns_.size());
  assigns_.push_back(kUndef);
  std::uint8_t ph = 0;
  double act = 0;
  if (random_phase_) {
    rng_ = mix64(rng_);
    ph = static_cast<std::uint8_t>(rng_ & 1u);
    act = static_cast<double>((rng_ >> 11) & 0xFFFF) * 1e-9;
  }
  phase_.push_back(ph);
  levels_.push_back(0);
  reasons_.push_back(kNoReason);
  seen_.push_back(0);
  activity_.push_back(act);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_pos_.push_back(-1);
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::span<const Lit> input) {
  if (!ok_) return false;
  cancel_until(0);
  std::vector<Lit> lits(input.begin(), input.end());
  std::sort(lits.begin(), lits.end());
  std::vector<Lit> kept;
  Lit prev = UINT32_MAX;
  for (Lit l : lits) {
    if (value(l) == kTrue || (prev != UINT32_MAX && l == negate(prev))) return true;
    if (value(l) == kFalse || l == prev) continue;
    kept.push_back(l);
    prev = l;
  }
  if (kept.empty()) {
    ok_ = false;
    return false;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], kNoReason);
    if (propagate() != kNoReason) ok_ = false;
    return ok_;
  }
  attach(std::move(kept), false);
  return true;
}

std::uint32_t Solver::attach(std::vector<Lit> lits, bool learnt) {
  const auto cref = static_cast<std::uint32_t>(clauses_.size());
  watches_[negate(lits[0])].push_back({cref, lits[1]});
  watches_[negate(lits[1])].push_back({cref, lits[0]});
  clauses_.push_back({std::move(lits), 0, learnt, false});
  if (learnt) learnts_.push_back(cref);
  return cref;
}

void Solver::enqueue(Lit l, std::uint32_t reason) {
  const Var v = var_of(l);
  assigns_[v] = is_negated(l) ? kFalse : kTrue;
  levels_[v] = level();
  reasons_[v] = reason;
  trail_.push_back(l);
}

std::uint32_t Solver::propagate() {
  std::uint32_t confl = kNoReason;
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    std::vector<Watcher>& ws = watches_[p];
    const Lit false_lit = negate(p);
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const Watcher w = ws[i];
      if (value(w.blocker) == kTrue) {
        ws[j++] = ws[i++];
        continue;
      }
      Clause& c = clauses_[w.cref];
      if (c.deleted) {
        ++i;
        continue;
      }
      if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
      ++i;
      const Lit first = c.lits[0];
      const Watcher nw{w.cref, first};
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = nw;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.lits.size(); ++k) {
        if (value(c.lits[k]) != kFalse) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[negate(c.lits[1])].push_back(nw);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = nw;
      if (value(first) == kFalse) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl != kNoReason) break;
  }
  return confl;
}

bool Solver::redundant(Lit l) {
  // Local minimization: l is implied by literals already in the clause.
  const std::uint32_t r = reasons_[var_of(l)];
  if (r == kNoReason) return false;
  const Clause& c = clauses_[r];
  for (std::size_t k = 1; k < c.lits.size(); ++k) {
    const Var v = var_of(c.lits[k]);
    if (!seen_[v] && levels_[v] > 0) return false;
  }
  return true;
}

void Solver::analyze(std::uint32_t confl, std::vector<Lit>& learnt, std::uint32_t& bt_level) {
  learnt.assign(1, 0);
  int path = 0;
  Lit p = UINT32_MAX;
  std::size_t index = trail_.size();
  do {
    Clause& c = clauses_[confl];
    if (c.learnt) bump_clause(c);
    for (std::size_t k = (p == UINT32_MAX ? 0 : 1); k < c.lits.size(); ++k) {
      const Lit q = c.lits[k];
      const Var v = var_of(q);
      if (!seen_[v] && levels_[v] > 0) {
        seen_[v] = 1;
        bump_var(v);
        if (levels_[v] >= level()) {
          ++path;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[var_of(trail_[--index])]) {
    }
    p = trail_[index];
    confl = reasons_[var_of(p)];
    seen_[var_of(p)] = 0;
    --path;
  } while (path > 0);
  learnt[0] = negate(p);

  std::vector<Lit> marked(learnt.begin() + 1, learnt.end());
  std::size_t keep = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    if (!redundant(learnt[k])) learnt[keep++] = learnt[k];
  }
  learnt.resize(keep);
  for (Lit l : marked) seen_[var_of(l)] = 0;

  bt_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k) {
      if (levels_[var_of(learnt[k])] > levels_[var_of(learnt[max_i])]) max_i = k;
    }
    std::swap(learnt[1], learnt[max_i]);
    bt_level = levels_[var_of(learnt[1])];
  }
}

void Solver::cancel_until(std::uint32_t lvl) {
  if (level() <= lvl) return;
  for (std::size_t k = trail_.size(); k-- > trail_lim_[lvl];) {
    const Var v = var_of(trail_[k]);
    phase_[v] = assigns_[v];
    assigns_[v] = kUndef;
    reasons_[v] = kNoReason;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(trail_lim_[lvl]);
  trail_lim_.resize(lvl);
  qhead_ = trail_.size();
}

void Solver::bump_var(Var v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[v]));
}

void Solver::bump_clause(Clause& c) {
  if ((c.activity += clause_inc_) > 1e20) {
    for (std::uint32_t cref : learnts_) clauses_[cref].activity *= 1e-20;
    clause_inc_ *= 1e-20;
  }
}

bool Solver::locked(std::uint32_t cref) const {
  const Clause& c = clauses_[cref];
  return value(c.lits[0]) == kTrue && reasons_[var_of(c.lits[0])] == cref;
}

void Solver::reduce_db() {
  std::sort(learnts_.begin(), learnts_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return clauses_[a].activity < clauses_[b].activity;
  });
  const std::size_t half = learnts_.size() / 2;
  std::vector<std::uint32_t> kept;
  for (std::size_t k = 0; k < learnts_.size(); ++k) {
    Clause& c = clauses_[learnts_[k]];
    if (k < half && c.lits.size() > 2 && !locked(learnts_[k])) {
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
    } else {
      kept.push_back(learnts_[k]);
    }
  }
  learnts_ = std::move(kept);
}

void Solver::heap_insert(Var v) {
  heap_pos_[v] = static_cast<std::int64_t>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void Solver::heap_up(std::size_t i) {
  const Var v = heap_[i];
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (!heap_less(v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = static_cast<std::int64_t>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<std::int64_t>(i);
}

void Solver::heap_down(std::size_t i) {
  const Var v = heap_[i];
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child])) ++child;
    if (!heap_less(heap_[child], v)) break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = static_cast<std::int64_t>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<std::int64_t>(i);
}

Var Solver::heap_pop() {
  const Var top = heap_.front();
  heap_pos_[top] = -1;
  const Var last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return top;
}

Result Solver::solve(std::optional<std::chrono::steady_clock::time_point> deadline,
                     std::uint64_t conflict_budget) {
  if (!ok_) return Result::Unsat;
  cancel_until(0);
  if (propagate() != kNoReason) {
    ok_ = false;
    return Result::Unsat;
  }
  max_learnts_ = std::max(1000.0, static_cast<double>(clauses_.size()) / 3.0);
  std::uint64_t restart_index = 0;
  std::uint64_t restart_limit = static_cast<std::uint64_t>(luby(2, restart_index) * 100);
  std::uint64_t since_restart = 0;
  const std::uint64_t start_conflicts = conflicts_;
  std::uint64_t steps = 0;
  std::vector<Lit> learnt;

  for (;;) {
    const std::uint32_t confl = propagate();
    if (confl != kNoReason) {
      ++conflicts_;
      ++since_restart;
      if (level() == 0) {
        ok_ = false;
        return Result::Unsat;
      }
      std::uint32_t bt = 0;
      analyze(confl, learnt, bt);
      cancel_until(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoReason);
      } else {
        const std::uint32_t cref = attach(learnt, true);
        bump_clause(clauses_[cref]);
        enqueue(learnt[0], cref);
      }
      var_inc_ /= 0.95;
      clause_inc_ /= 0.999;
      if (conflicts_ - start_conflicts >= conflict_budget) {
        cancel_until(0);
        return Result::Unknown;
      }
      if ((conflicts_ & 255) == 0 && deadline && std::chrono::steady_clock::now() > *deadline) {
        cancel_until(0);
        return Result::Unknown;
      }
      if (since_restart >= restart_limit) {
        since_restart = 0;
        restart_limit = static_cast<std::uint64_t>(luby(2, ++restart_index) * 100);
        cancel_until(0);
      }
      continue;
    }
    if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >=
        max_learnts_) {
      reduce_db();
      max_learnts_ *= 1.1;
    }
    if ((++steps & 4095) == 0 && deadline && std::chrono::steady_clock::now() > *deadline) {
      cancel_until(0);
      return Result::Unknown;
    }
    Var next = UINT32_MAX;
    while (!heap_.empty()) {
      const Var v = heap_pop();
      if (assigns_[v] == kUndef) {
        next = v;
        break;
      }
    }
    if (next == UINT32_MAX) {
      model_ = assigns_;
      cancel_until(0);
      return Result::Sat;
    }
    trail_lim_.push_back(trail_.size());
    enqueue(make_lit(next, phase_[next] == kFalse), kNoReason);
  }
}

}  // namespace invsynth::sat
