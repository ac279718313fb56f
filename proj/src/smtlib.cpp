#include "invsynth/smtlib.hpp"

#include "invsynth/error.hpp"

namespace invsynth {

namespace {

void emit(const Expr& e, std::size_t i, std::span<const std::string> names, unsigned width,
          std::string& out) {
  const Node& n = e.node(i);
  switch (n.op) {
    case Op::Var:
      if (n.imm >= names.size()) {
        throw Error(Errc::ArityMismatch, "no name for v" + std::to_string(n.imm));
      }
      out += names[n.imm];
      return;
    case Op::Const:
      out += smt_bv_literal(n.imm, width);
      return;
    default:
      out += '(';
      out += op_info(n.op).smt;
      for (std::size_t k = 0; k < n.arity; ++k) {
        out += ' ';
        emit(e, n.kids[k], names, width, out);
      }
      out += ')';
  }
}

}  // namespace

std::string smt_bv_literal(std::uint32_t value, unsigned width) {
  value &= width_mask(width);
  std::string out;
  if (width % 4 == 0) {
    static constexpr char kHex[] = "0123456789abcdef";
    out = "#x";
    for (unsigned d = width / 4; d-- > 0;) out += kHex[(value >> (4 * d)) & 0xF];
  } else {
    out = "#b";
    for (unsigned b = width; b-- > 0;) out += ((value >> b) & 1u) ? '1' : '0';
  }
  return out;
}

std::string smt_sort(unsigned width) { return "(_ BitVec " + std::to_string(width) + ")"; }

std::string to_smtlib(const Expr& e, std::span<const std::string> names, unsigned width) {
  std::string out;
  emit(e, 0, names, width, out);
  return out;
}

std::string to_smtlib(const Program& p, std::span<const std::string> names, unsigned width) {
  if (names.size() != p.param_count()) {
    throw Error(Errc::ArityMismatch, "program has " + std::to_string(p.param_count()) +
                                         " parameters, got " + std::to_string(names.size()) +
                                         " names");
  }
  return to_smtlib(p.expr(), names, width);
}

}  // namespace invsynth
