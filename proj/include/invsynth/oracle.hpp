// Satisfiability and verification queries over the predicate language.
//
// Three interchangeable backends answer check_sat:
//   brute     exhaustive enumeration at reduced width
//   bitblast  in-process CDCL solver over a bit-blasted encoding
//   external  an SMT-LIB2 solver process (z3 -in by default)

#ifndef INVSYNTH_ORACLE_HPP
#define INVSYNTH_ORACLE_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invsynth/expr.hpp"
#include "invsynth/spec.hpp"

namespace invsynth {

enum class Backend { BruteForce, BitBlast, External };

std::string_view backend_name(Backend b);

struct SolverConfig {
  Backend backend = Backend::BruteForce;
  std::string command = "z3 -in";
  bool random_phase = false;
  std::uint64_t seed = 0;
  std::chrono::milliseconds timeout{30000};
  unsigned brute_force_limit = 20;  // enumerated state bits
};

enum class Verdict { Sat, Unsat, Unknown };

std::string_view verdict_name(Verdict v);

struct SatResult {
  Verdict verdict = Verdict::Unknown;
  InputAssignment model;  // total over the query's variables when Sat
  std::string reason;     // why Unknown

  static SatResult sat(InputAssignment m) { return {Verdict::Sat, std::move(m), {}}; }
  static SatResult unsat() { return {Verdict::Unsat, {}, {}}; }
  static SatResult unknown(std::string why) { return {Verdict::Unknown, {}, std::move(why)}; }
};

// One oracle instance is single-caller. With random_phase set, the query
// number is mixed into the seed so repeated queries may return different
// models while a fixed query sequence stays reproducible.
class Oracle {
 public:
  explicit Oracle(SolverConfig cfg) : cfg_(std::move(cfg)) {}
  virtual ~Oracle() = default;
  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;

  // `formula` is Boolean over variables 0..var_count-1 of `width` bits.
  SatResult check_sat(const Expr& formula, std::size_t var_count, unsigned width);

  const SolverConfig& config() const { return cfg_; }
  void set_seed(std::uint64_t seed) {
    cfg_.seed = seed;
    queries_ = 0;
  }
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> d) { deadline_ = d; }
  std::uint64_t queries() const { return queries_; }

 protected:
  virtual SatResult solve(const Expr& formula, std::size_t var_count, unsigned width,
                          std::uint64_t seed, std::chrono::milliseconds budget) = 0;

 private:
  SolverConfig cfg_;
  std::uint64_t queries_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

// Throws InvalidArgument for an empty external command.
std::unique_ptr<Oracle> make_oracle(const SolverConfig& cfg);

// True if `command` starts and answers a trivial QF_BV query.
bool external_solver_available(const std::string& command = "z3 -in");

// Exhaustive backend as a plain function. Conjuncts of the form
// (bveq v e), with e free of v, fix v from the enumerated variables, so
// only the remaining variables count against `limit`. Throws
// BruteForceLimitExceeded.
SatResult brute_force_check(const Expr& formula, std::size_t var_count, unsigned width,
                            unsigned limit, std::optional<std::uint64_t> random_seed,
                            std::optional<std::chrono::steady_clock::time_point> deadline = {});

// Bits brute_force_check would enumerate for this query.
unsigned brute_force_bits(const Expr& formula, std::size_t var_count, unsigned width);

// Up to `count` models of `formula` that differ on variables
// [first, first + span). Each new model is required to differ from the
// previous ones by a blocking conjunct.
std::vector<InputAssignment> distinct_models(Oracle& oracle, const Expr& formula,
                                             std::size_t var_count, unsigned width,
                                             std::size_t first, std::size_t span,
                                             std::size_t count);

struct Counterexample {
  ConditionKind kind = ConditionKind::Initiation;
  InputAssignment state;
  std::optional<InputAssignment> successor;  // inductiveness only
  bool candidate_output = false;
  std::optional<bool> successor_output;
};

// True iff the named condition is violated on (state, successor).
bool is_genuine(const InvariantSpec& spec, const Program& candidate, const Counterexample& cex);

enum class VerifyStatus { Verified, Refuted, Unknown };

struct VerifyResult {
  VerifyStatus status = VerifyStatus::Unknown;
  std::optional<Counterexample> cex;
  std::string reason;
};

// Checks initiation, inductiveness and safety in that order and returns the
// first violation found.
VerifyResult verify_invariant(const InvariantSpec& spec, const Program& candidate,
                              Oracle& oracle);

enum class Label { KnownTrue, KnownFalse, Unknown };

struct LabelInfo {
  Label label = Label::Unknown;
  bool feasible = true;  // false when I(x) holds and A(x) fails
};

LabelInfo solve_output_labels(const InvariantSpec& spec, std::span<const std::uint32_t> x);

// True iff no successor x' of x under T violates A, i.e.
// T(x, x') /\ not A(x') is unsatisfiable. nullopt on Unknown.
std::optional<bool> successors_safe(const InvariantSpec& spec,
                                    std::span<const std::uint32_t> x, Oracle& oracle);

std::string format_assignment(std::span<const std::uint32_t> values,
                              std::span<const std::string> names);
std::string describe(const Counterexample& cex, const InvariantSpec& spec);

}  // namespace invsynth

#endif  // INVSYNTH_ORACLE_HPP
