// Invariant synthesis problems (I, T, A) and the SyGuS-IF invariant-track
// subset they are read from.

#ifndef INVSYNTH_SPEC_HPP
#define INVSYNTH_SPEC_HPP

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "invsynth/expr.hpp"
#include "invsynth/sexpr.hpp"

namespace invsynth {

inline constexpr unsigned kMinWidth = 2;
inline constexpr unsigned kMaxWidth = 32;

struct InvariantSpec {
  std::string inv_name = "inv_fun";
  std::vector<std::string> params;  // unprimed state variable names
  unsigned width = 32;
  Program init;   // over params
  Program trans;  // over params followed by their primed copies
  Program post;   // over params

  std::size_t arity() const { return params.size(); }
  std::size_t state_bits() const { return params.size() * width; }
  // Names for the 2n variables of `trans` (x..., x!...).
  std::vector<std::string> trans_names() const;
};

// Builds and validates a spec. Throws ArityMismatch/SortMismatch when the
// predicates do not match the parameter list or the width is out of range.
InvariantSpec make_spec(std::vector<std::string> params, unsigned width, Expr init,
                        Expr trans, Expr post, std::string inv_name = "inv_fun");

enum class ConditionKind { Initiation, Inductiveness, Safety };

inline constexpr std::array<ConditionKind, 3> kConditionOrder{
    ConditionKind::Initiation, ConditionKind::Inductiveness, ConditionKind::Safety};

std::string_view condition_name(ConditionKind kind);

// A closed condition `forall vars. antecedent => consequent`. Variables
// 0..n-1 are the state, n..2n-1 (inductiveness only) the successor.
struct VerificationCondition {
  ConditionKind kind;
  Expr antecedent;
  Expr consequent;
  std::size_t var_count;

  Expr formula() const { return implies(antecedent, consequent); }
  // Satisfiable iff the condition is violated.
  Expr violation() const { return antecedent && !consequent; }
};

// Initiation I(x) => P(x); inductiveness P(x) /\ T(x,x') => P(x');
// safety P(x) => A(x). Throws ArityMismatch.
std::array<VerificationCondition, 3> instantiate_conditions(const InvariantSpec& spec,
                                                            const Program& candidate);

// Direct evaluation of one condition on concrete states. `successor` is
// ignored except for inductiveness.
bool condition_holds(const InvariantSpec& spec, const Program& candidate,
                     ConditionKind kind, std::span<const std::uint32_t> state,
                     std::span<const std::uint32_t> successor = {});

// Throws SyntaxError, UnsupportedConstruct or SortMismatch.
InvariantSpec parse_benchmark(std::string_view text);
InvariantSpec load_benchmark(const std::string& path);

// Lowers an SMT-LIB term over the given bit-vector variables (all of
// `width` bits) into the expression language. `let` is inlined; `=>`,
// `xor`, `distinct`, Boolean `=`, and `true`/`false` are rewritten into the
// core operators.
Expr lower_smt_term(const SExpr& term, std::span<const std::string> vars, unsigned width);

// Candidate invariant text for a spec: a token sequence (starting with <s>),
// a define-fun, or a bare SMT-LIB term over the spec's parameters.
Program parse_invariant_text(const InvariantSpec& spec, std::string_view text);

// (define-fun <inv> ((x (_ BitVec w)) ...) Bool <term>)
std::string invariant_define_fun(const InvariantSpec& spec, const Program& invariant);

// Integer constants mentioned by the spec's predicates (truncated to width).
std::vector<std::uint32_t> spec_constants(const InvariantSpec& spec);

}  // namespace invsynth

#endif  // INVSYNTH_SPEC_HPP
