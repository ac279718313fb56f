#include "invsynth/expr.hpp"

#include <algorithm>
#include <string>

#include "invsynth/error.hpp"

namespace invsynth {

namespace {

constexpr Sort BV = Sort::BitVec;
constexpr Sort B = Sort::Bool;

constexpr std::array<OpInfo, kOpCount> kOps{{
    {"var", "", 0, BV, BV, false},
    {"const", "", 0, BV, BV, false},
    {"bvnot", "bvnot", 1, BV, BV, false},
    {"bvneg", "bvneg", 1, BV, BV, false},
    {"bvadd", "bvadd", 2, BV, BV, true},
    {"bvsub", "bvsub", 2, BV, BV, false},
    {"bvmul", "bvmul", 2, BV, BV, true},
    {"bvand", "bvand", 2, BV, BV, true},
    {"bvor", "bvor", 2, BV, BV, true},
    {"bvxor", "bvxor", 2, BV, BV, true},
    {"bvshl", "bvshl", 2, BV, BV, false},
    {"bvlshr", "bvlshr", 2, BV, BV, false},
    {"bvashr", "bvashr", 2, BV, BV, false},
    {"bveq", "=", 2, B, BV, true},
    {"bvult", "bvult", 2, B, BV, false},
    {"bvule", "bvule", 2, B, BV, false},
    {"bvugt", "bvugt", 2, B, BV, false},
    {"bvuge", "bvuge", 2, B, BV, false},
    {"bvslt", "bvslt", 2, B, BV, false},
    {"bvsle", "bvsle", 2, B, BV, false},
    {"bvsgt", "bvsgt", 2, B, BV, false},
    {"bvsge", "bvsge", 2, B, BV, false},
    {"and", "and", 2, B, B, true},
    {"or", "or", 2, B, B, true},
    {"not", "not", 1, B, B, false},
    {"ite", "ite", 3, BV, B, false},
}};

std::int32_t to_signed(std::uint32_t v, unsigned width) {
  if (width >= 32) return static_cast<std::int32_t>(v);
  const std::uint32_t sign = 1u << (width - 1);
  return static_cast<std::int32_t>((v ^ sign)) - static_cast<std::int32_t>(sign);
}

}  // namespace

const OpInfo& op_info(Op op) { return kOps[static_cast<std::size_t>(op)]; }

bool is_bv_unary(Op op) { return op == Op::BvNot || op == Op::BvNeg; }
bool is_bv_binary(Op op) { return op >= Op::BvAdd && op <= Op::BvAshr; }
bool is_comparison(Op op) { return op >= Op::BvEq && op <= Op::BvSge; }
bool is_shift(Op op) {
  return op == Op::BvShl || op == Op::BvLshr || op == Op::BvAshr;
}

Expr Expr::var(std::uint32_t index) {
  Node n;
  n.op = Op::Var;
  n.imm = index;
  return Expr({n});
}

Expr Expr::constant(std::uint32_t value) {
  Node n;
  n.op = Op::Const;
  n.imm = value;
  return Expr({n});
}

Expr Expr::make(Op op, std::span<const Expr> args) {
  const OpInfo& info = op_info(op);
  if (op == Op::Var || op == Op::Const) {
    throw Error(Errc::ArityMismatch, "leaves are built with var()/constant()");
  }
  if (args.size() != info.arity) {
    throw Error(Errc::ArityMismatch,
                std::string(info.mnemonic) + " expects " +
                    std::to_string(info.arity) + " operands, got " +
                    std::to_string(args.size()));
  }
  Sort result = info.result;
  if (op == Op::Ite) {
    if (args[0].sort() != Sort::Bool) {
      throw Error(Errc::TypeMismatch, "ite condition must be Boolean");
    }
    if (args[1].sort() != args[2].sort()) {
      throw Error(Errc::TypeMismatch, "ite branches have different sorts");
    }
    result = args[1].sort();
  } else {
    for (const Expr& a : args) {
      if (a.sort() != info.operand) {
        throw Error(Errc::TypeMismatch,
                    std::string(info.mnemonic) + " applied to operand of wrong sort");
      }
    }
  }

  std::size_t total = 1;
  for (const Expr& a : args) total += a.size();
  std::vector<Node> nodes;
  nodes.reserve(total);
  Node root;
  root.op = op;
  root.arity = info.arity;
  root.sort = result;
  nodes.push_back(root);
  for (std::size_t k = 0; k < args.size(); ++k) {
    const auto offset = static_cast<std::uint32_t>(nodes.size());
    nodes.front().kids[k] = offset;
    for (Node n : args[k].nodes_) {
      for (std::size_t j = 0; j < n.arity; ++j) n.kids[j] += offset;
      nodes.push_back(n);
    }
  }
  return Expr(std::move(nodes));
}

Expr Expr::make(Op op, const Expr& a) {
  return make(op, std::span<const Expr>(&a, 1));
}

Expr Expr::make(Op op, const Expr& a, const Expr& b) {
  const std::array<Expr, 2> args{a, b};
  return make(op, args);
}

Expr Expr::make(Op op, const Expr& a, const Expr& b, const Expr& c) {
  const std::array<Expr, 3> args{a, b, c};
  return make(op, args);
}

Expr Expr::literal(bool value) {
  Expr t = make(Op::BvEq, var(0), var(0));
  return value ? t : make(Op::Not, t);
}

Expr Expr::subtree(std::size_t index) const {
  if (index == 0) return *this;
  // Preorder subtrees are contiguous; find the end by walking descendants.
  std::size_t end = index + 1;
  std::vector<std::size_t> stack{index};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    end = std::max(end, i + 1);
    for (std::size_t k = 0; k < nodes_[i].arity; ++k) stack.push_back(nodes_[i].kids[k]);
  }
  std::vector<Node> out(nodes_.begin() + static_cast<std::ptrdiff_t>(index),
                        nodes_.begin() + static_cast<std::ptrdiff_t>(end));
  const auto offset = static_cast<std::uint32_t>(index);
  for (Node& n : out) {
    for (std::size_t k = 0; k < n.arity; ++k) n.kids[k] -= offset;
  }
  return Expr(std::move(out));
}

std::uint32_t Expr::var_bound() const {
  std::uint32_t bound = 0;
  for (const Node& n : nodes_) {
    if (n.op == Op::Var) bound = std::max(bound, n.imm + 1);
  }
  return bound;
}

std::size_t Expr::count(Op op) const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [op](const Node& n) { return n.op == op; }));
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.nodes_.size() != b.nodes_.size()) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const Node& x = a.nodes_[i];
    const Node& y = b.nodes_[i];
    if (x.op != y.op || x.imm != y.imm || x.arity != y.arity) return false;
    for (std::size_t k = 0; k < x.arity; ++k) {
      if (x.kids[k] != y.kids[k]) return false;
    }
  }
  return true;
}

Expr operator!(const Expr& e) { return Expr::make(Op::Not, e); }
Expr operator&&(const Expr& a, const Expr& b) { return Expr::make(Op::And, a, b); }
Expr operator||(const Expr& a, const Expr& b) { return Expr::make(Op::Or, a, b); }
Expr implies(const Expr& a, const Expr& b) { return !a || b; }

Expr shift_vars(const Expr& e, std::uint32_t offset) {
  return map_vars(e, [offset](std::uint32_t i) { return Expr::var(i + offset); });
}

Expr bind_vars(const Expr& e, std::span<const Expr> values) {
  return map_vars(e, [&](std::uint32_t i) {
    if (i >= values.size()) {
      throw Error(Errc::ArityMismatch, "no binding for variable v" + std::to_string(i));
    }
    return values[i];
  });
}

Program::Program(Expr expr, std::size_t param_count)
    : expr_(std::move(expr)), param_count_(param_count) {
  if (expr_.sort() != Sort::Bool) {
    throw Error(Errc::TypeMismatch, "program root must be Boolean");
  }
  if (expr_.var_bound() > param_count_) {
    throw Error(Errc::ArityMismatch,
                "program references v" + std::to_string(expr_.var_bound() - 1) +
                    " but declares " + std::to_string(param_count_) + " parameters");
  }
}

std::uint32_t apply_op(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                       unsigned width) {
  const std::uint32_t mask = width_mask(width);
  switch (op) {
    case Op::Var:
    case Op::Const:
      return a & mask;
    case Op::BvNot:
      return ~a & mask;
    case Op::BvNeg:
      return (0u - a) & mask;
    case Op::BvAdd:
      return (a + b) & mask;
    case Op::BvSub:
      return (a - b) & mask;
    case Op::BvMul:
      return (a * b) & mask;
    case Op::BvAnd:
      return a & b;
    case Op::BvOr:
      return a | b;
    case Op::BvXor:
      return a ^ b;
    case Op::BvShl:
      return b >= width ? 0u : (a << b) & mask;
    case Op::BvLshr:
      return b >= width ? 0u : a >> b;
    case Op::BvAshr: {
      const std::int32_t s = to_signed(a, width);
      const std::int32_t r = b >= width ? (s < 0 ? -1 : 0) : (s >> b);
      return static_cast<std::uint32_t>(r) & mask;
    }
    case Op::BvEq:
      return a == b;
    case Op::BvUlt:
      return a < b;
    case Op::BvUle:
      return a <= b;
    case Op::BvUgt:
      return a > b;
    case Op::BvUge:
      return a >= b;
    case Op::BvSlt:
      return to_signed(a, width) < to_signed(b, width);
    case Op::BvSle:
      return to_signed(a, width) <= to_signed(b, width);
    case Op::BvSgt:
      return to_signed(a, width) > to_signed(b, width);
    case Op::BvSge:
      return to_signed(a, width) >= to_signed(b, width);
    case Op::And:
      return a & b;
    case Op::Or:
      return a | b;
    case Op::Not:
      return a ^ 1u;
    case Op::Ite:
      return a ? b : c;
  }
  return 0;
}

namespace {

// Children have larger indices than their parent, so a reverse sweep
// evaluates every node after its operands.
void eval_nodes(std::span<const Node> nodes, std::span<const std::uint32_t> inputs,
                unsigned width, std::uint32_t* values) {
  const std::uint32_t mask = width_mask(width);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const Node& n = nodes[i];
    switch (n.op) {
      case Op::Var:
        values[i] = inputs[n.imm] & mask;
        break;
      case Op::Const:
        values[i] = n.imm & mask;
        break;
      default:
        values[i] = apply_op(n.op, values[n.kids[0]],
                             n.arity > 1 ? values[n.kids[1]] : 0,
                             n.arity > 2 ? values[n.kids[2]] : 0, width);
    }
  }
}

void check_inputs(const Expr& e, std::span<const std::uint32_t> inputs) {
  if (e.var_bound() > inputs.size()) {
    throw Error(Errc::ArityMismatch,
                "expression needs " + std::to_string(e.var_bound()) +
                    " inputs, got " + std::to_string(inputs.size()));
  }
}

void check_arity(const Program& p, std::span<const std::uint32_t> inputs) {
  if (inputs.size() != p.param_count()) {
    throw Error(Errc::ArityMismatch,
                "program has " + std::to_string(p.param_count()) +
                    " parameters, got " + std::to_string(inputs.size()) + " inputs");
  }
}

}  // namespace

std::uint32_t eval_expr(const Expr& e, std::span<const std::uint32_t> inputs,
                        unsigned width) {
  check_inputs(e, inputs);
  constexpr std::size_t kInline = 64;
  if (e.size() <= kInline) {
    std::array<std::uint32_t, kInline> values;
    eval_nodes(e.nodes(), inputs, width, values.data());
    return values[0];
  }
  std::vector<std::uint32_t> values(e.size());
  eval_nodes(e.nodes(), inputs, width, values.data());
  return values[0];
}

bool eval(const Program& p, std::span<const std::uint32_t> inputs, unsigned width) {
  check_arity(p, inputs);
  return eval_expr(p.expr(), inputs, width) != 0;
}

std::pair<bool, BranchRecord> eval_trace(const Program& p,
                                         std::span<const std::uint32_t> inputs,
                                         unsigned width) {
  check_arity(p, inputs);
  const Expr& e = p.expr();
  std::vector<std::uint32_t> values(e.size());
  eval_nodes(e.nodes(), inputs, width, values.data());

  BranchRecord record;
  std::vector<std::uint32_t> stack{0};
  // Visit in preorder: push children in reverse so the leftmost pops first.
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    const Node& n = e.node(i);
    if (n.op == Op::Ite) {
      const bool taken_then = values[n.kids[0]] != 0;
      record.push_back({i, taken_then ? Branch::Then : Branch::Else});
      stack.push_back(taken_then ? n.kids[1] : n.kids[2]);
      stack.push_back(n.kids[0]);
      continue;
    }
    for (std::size_t k = n.arity; k-- > 0;) stack.push_back(n.kids[k]);
  }
  std::sort(record.begin(), record.end(),
            [](const BranchDecision& a, const BranchDecision& b) { return a.node < b.node; });
  return {values[0] != 0, std::move(record)};
}

Evaluator::Evaluator(const Expr& e, unsigned width)
    : expr_(&e), width_(width), values_(e.size()) {}

std::uint32_t Evaluator::operator()(std::span<const std::uint32_t> inputs) {
  eval_nodes(expr_->nodes(), inputs, width_, values_.data());
  return values_[0];
}

Expr path_condition(const Expr& e, std::uint32_t index) {
  // Walk from the root towards `index`, collecting the branch guards of every
  // enclosing ite whose then/else subtree contains it.
  std::vector<Expr> guards;
  std::uint32_t at = 0;
  while (at != index) {
    const Node& n = e.node(at);
    std::uint32_t next = at;
    for (std::size_t k = n.arity; k-- > 0;) {
      if (n.kids[k] <= index) {
        next = n.kids[k];
        break;
      }
    }
    if (next == at) break;
    if (n.op == Op::Ite && next != n.kids[0]) {
      Expr cond = e.subtree(n.kids[0]);
      guards.push_back(next == n.kids[1] ? cond : !cond);
    }
    at = next;
  }
  if (guards.empty()) return Expr::literal(true);
  Expr out = guards.front();
  for (std::size_t i = 1; i < guards.size(); ++i) out = out && guards[i];
  return out;
}

}  // namespace invsynth
