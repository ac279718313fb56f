// A small CDCL SAT solver: two watched literals, first-UIP learning, VSIDS,
// phase saving, Luby restarts and activity-based clause deletion.

#ifndef INVSYNTH_SAT_HPP
#define INVSYNTH_SAT_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace invsynth::sat {

// Literal encoding: 2 * var + (negated ? 1 : 0).
using Lit = std::uint32_t;
using Var = std::uint32_t;

constexpr Lit make_lit(Var v, bool negated = false) { return (v << 1) | (negated ? 1u : 0u); }
constexpr Lit negate(Lit l) { return l ^ 1u; }
constexpr Var var_of(Lit l) { return l >> 1; }
constexpr bool is_negated(Lit l) { return (l & 1u) != 0; }

enum class Result { Sat, Unsat, Unknown };

class Solver {
 public:
  // With random_phase, initial polarities and the initial decision order
  // are drawn from `seed`.
  explicit Solver(std::uint64_t seed = 0, bool random_phase = false);

  Var new_var();
  std::size_t var_count() const { return assigns_.size(); }

  // Returns false once the clause set is known to be unsatisfiable.
  bool add_clause(std::span<const Lit> lits);
  bool add_clause(std::initializer_list<Lit> lits) {
    return add_clause(std::span<const Lit>(lits.begin(), lits.size()));
  }

  Result solve(std::optional<std::chrono::steady_clock::time_point> deadline = {},
               std::uint64_t conflict_budget = UINT64_MAX);

  // Model value after Sat.
  bool model_value(Var v) const { return model_[v] != 0; }
  bool model_value_lit(Lit l) const { return model_value(var_of(l)) != is_negated(l); }

  std::uint64_t conflicts() const { return conflicts_; }

 private:
  static constexpr std::uint32_t kNoReason = UINT32_MAX;
  static constexpr std::uint8_t kFalse = 0, kTrue = 1, kUndef = 2;

  struct Clause {
    std::vector<Lit> lits;
    double activity = 0;
    bool learnt = false;
    bool deleted = false;
  };
  struct Watcher {
    std::uint32_t cref;
    Lit blocker;
  };

  std::uint8_t value(Lit l) const {
    const std::uint8_t a = assigns_[var_of(l)];
    return a == kUndef ? kUndef : static_cast<std::uint8_t>(a ^ (l & 1u));
  }
  std::uint32_t level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

  void enqueue(Lit l, std::uint32_t reason);
  std::uint32_t attach(std::vector<Lit> lits, bool learnt);
  std::uint32_t propagate();
  void analyze(std::uint32_t confl, std::vector<Lit>& learnt, std::uint32_t& bt_level);
  bool redundant(Lit l);
  void cancel_until(std::uint32_t lvl);
  void bump_var(Var v);
  void bump_clause(Clause& c);
  void reduce_db();
  bool locked(std::uint32_t cref) const;

  // heap keyed on activity_
  void heap_insert(Var v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  Var heap_pop();
  bool heap_less(Var a, Var b) const { return activity_[a] > activity_[b]; }

  std::vector<Clause> clauses_;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::uint8_t> assigns_;
  std::vector<std::uint8_t> phase_;
  std::vector<std::uint32_t> levels_;
  std::vector<std::uint32_t> reasons_;
  std::vector<std::uint8_t> seen_;
  std::vector<double> activity_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<Var> heap_;
  std::vector<std::int64_t> heap_pos_;
  std::vector<std::uint8_t> model_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  double max_learnts_ = 0;
  std::uint64_t conflicts_ = 0;
  std::uint64_t rng_;
  bool random_phase_;
  bool ok_ = true;
};

}  // namespace invsynth::sat

#endif  // INVSYNTH_SAT_HPP
