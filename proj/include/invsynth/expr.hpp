// Predicate language over fixed-width bit-vectors.
//
// An Expr is an immutable tree stored as a flat preorder array of nodes; the
// root is node 0 and every child index is larger than its parent's. Node
// indices are therefore stable and are used to identify ite nodes in branch
// traces. Typing is checked on construction, so every Expr is well-typed.
//
// Semantics follow the SMT-LIB fixed-size bit-vector theory at a chosen width
// (32 for the surface language, smaller widths for exhaustive checking):
// arithmetic wraps modulo 2^width, constants are truncated to the width, and
// shifts by amounts >= width produce 0 (bvshl, bvlshr) or the sign fill
// (bvashr). There is no division, so evaluation is total.

#ifndef INVSYNTH_EXPR_HPP
#define INVSYNTH_EXPR_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace invsynth {

enum class Sort : std::uint8_t { BitVec, Bool };

enum class Op : std::uint8_t {
  Var,
  Const,
  // bit-vector unary
  BvNot,
  BvNeg,
  // bit-vector binary
  BvAdd,
  BvSub,
  BvMul,
  BvAnd,
  BvOr,
  BvXor,
  BvShl,
  BvLshr,
  BvAshr,
  // comparisons
  BvEq,
  BvUlt,
  BvUle,
  BvUgt,
  BvUge,
  BvSlt,
  BvSle,
  BvSgt,
  BvSge,
  // connectives
  And,
  Or,
  Not,
  Ite,
};

inline constexpr std::size_t kOpCount = static_cast<std::size_t>(Op::Ite) + 1;

struct OpInfo {
  std::string_view mnemonic;  // token text
  std::string_view smt;       // SMT-LIB function symbol
  std::uint8_t arity;
  Sort result;                // for Ite, the sort of the branches
  Sort operand;               // for Ite, the sort of the condition
  bool commutative;
};

const OpInfo& op_info(Op op);

bool is_bv_unary(Op op);
bool is_bv_binary(Op op);
bool is_comparison(Op op);
bool is_shift(Op op);

struct Node {
  Op op = Op::Var;
  std::uint8_t arity = 0;
  Sort sort = Sort::BitVec;
  std::uint32_t imm = 0;  // variable index or constant value
  std::array<std::uint32_t, 3> kids{};
};

class Expr {
 public:
  static Expr var(std::uint32_t index);
  static Expr constant(std::uint32_t value);
  // Throws Error(ArityMismatch / TypeMismatch) on ill-formed applications.
  static Expr make(Op op, std::span<const Expr> args);
  static Expr make(Op op, const Expr& a);
  static Expr make(Op op, const Expr& a, const Expr& b);
  static Expr make(Op op, const Expr& a, const Expr& b, const Expr& c);

  // Canonical constant predicates. There is no Boolean literal in the
  // vocabulary, so `true` is (bveq v0 v0) and `false` is its negation.
  static Expr literal(bool value);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Node& root() const { return nodes_.front(); }
  Op op() const { return root().op; }
  Sort sort() const { return root().sort; }
  std::size_t size() const { return nodes_.size(); }

  // Copy of the subtree rooted at node `index`.
  Expr subtree(std::size_t index) const;
  Expr child(std::size_t i) const { return subtree(root().kids[i]); }

  // One past the largest variable index referenced (0 if none).
  std::uint32_t var_bound() const;
  std::size_t count(Op op) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  Expr() = default;
  explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  std::vector<Node> nodes_;
};

Expr operator!(const Expr& e);
Expr operator&&(const Expr& a, const Expr& b);
Expr operator||(const Expr& a, const Expr& b);
Expr implies(const Expr& a, const Expr& b);

// Replaces every Var(i) by replacement(i).
template <class F>
Expr map_vars(const Expr& e, F&& replacement);

// Var(i) -> Var(i + offset).
Expr shift_vars(const Expr& e, std::uint32_t offset);
// Var(i) -> values[i] as constants.
Expr bind_vars(const Expr& e, std::span<const Expr> values);

// A predicate together with the number of parameters it ranges over.
class Program {
 public:
  // Throws TypeMismatch if `expr` is not Boolean, ArityMismatch if it
  // references a variable >= param_count.
  Program(Expr expr, std::size_t param_count);

  static Program literal(bool value, std::size_t param_count) {
    return {Expr::literal(value), param_count};
  }

  const Expr& expr() const { return expr_; }
  std::size_t param_count() const { return param_count_; }
  std::size_t size() const { return expr_.size(); }

  friend bool operator==(const Program&, const Program&) = default;

 private:
  Expr expr_;
  std::size_t param_count_;
};

using InputAssignment = std::vector<std::uint32_t>;

constexpr std::uint32_t width_mask(unsigned width) {
  return width >= 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
}

// Value of an expression of either sort (Booleans as 0/1). Inputs are masked
// to `width`. Does not check arity beyond bounds: `inputs` must cover
// expr.var_bound().
std::uint32_t eval_expr(const Expr& e, std::span<const std::uint32_t> inputs,
                        unsigned width = 32);

// Throws ArityMismatch if inputs.size() != p.param_count().
bool eval(const Program& p, std::span<const std::uint32_t> inputs,
          unsigned width = 32);

enum class Branch : std::uint8_t { Then, Else };

struct BranchDecision {
  std::uint32_t node;
  Branch branch;
  friend bool operator==(const BranchDecision&, const BranchDecision&) = default;
};

// Ite nodes on the executed path (the condition of every visited ite is
// visited; only the taken branch is), in preorder.
using BranchRecord = std::vector<BranchDecision>;

std::pair<bool, BranchRecord> eval_trace(const Program& p,
                                         std::span<const std::uint32_t> inputs,
                                         unsigned width = 32);

// Reusable evaluator for hot loops (exhaustive enumeration, bulk checks).
class Evaluator {
 public:
  Evaluator(const Expr& e, unsigned width);
  std::uint32_t operator()(std::span<const std::uint32_t> inputs);
  unsigned width() const { return width_; }

 private:
  const Expr* expr_;
  unsigned width_;
  std::vector<std::uint32_t> values_;
};

// Single-step semantics, shared by the evaluators.
std::uint32_t apply_op(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                       unsigned width);

// Path condition under which node `index` is visited by eval_trace.
Expr path_condition(const Expr& e, std::uint32_t index);

template <class F>
Expr map_vars(const Expr& e, F&& replacement) {
  auto rec = [&](auto&& self, std::size_t i) -> Expr {
    const Node& n = e.node(i);
    if (n.op == Op::Var) return replacement(n.imm);
    if (n.op == Op::Const) return Expr::constant(n.imm);
    std::array<Expr, 3> kids{Expr::literal(true), Expr::literal(true),
                             Expr::literal(true)};
    for (std::size_t k = 0; k < n.arity; ++k) kids[k] = self(self, n.kids[k]);
    return Expr::make(n.op, std::span<const Expr>(kids.data(), n.arity));
  };
  return rec(rec, 0);
}

}  // namespace invsynth

#endif  // INVSYNTH_EXPR_HPP
