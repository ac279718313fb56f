#include "invsynth/bitblast.hpp"

#include "invsynth/error.hpp"

namespace invsynth {

using sat::Lit;
using sat::negate;

BitBlaster::BitBlaster(sat::Solver& solver, unsigned width) : solver_(solver), width_(width) {
  true_ = sat::make_lit(solver_.new_var());
  solver_.add_clause({true_});
}

Lit BitBlaster::fresh() { return sat::make_lit(solver_.new_var()); }

const std::vector<Lit>& BitBlaster::var_bits(std::uint32_t index) {
  if (index >= vars_.size()) vars_.resize(index + 1);
  Bits& bits = vars_[index];
  if (bits.empty()) {
    for (unsigned i = 0; i < width_; ++i) bits.push_back(fresh());
  }
  return bits;
}

Lit BitBlaster::and2(Lit a, Lit b) {
  const Lit f = false_lit();
  if (a == f || b == f || a == negate(b)) return f;
  if (a == true_ || a == b) return b;
  if (b == true_) return a;
  const Lit g = fresh();
  solver_.add_clause({negate(g), a});
  solver_.add_clause({negate(g), b});
  solver_.add_clause({g, negate(a), negate(b)});
  return g;
}

Lit BitBlaster::xor2(Lit a, Lit b) {
  const Lit f = false_lit();
  if (a == f) return b;
  if (b == f) return a;
  if (a == true_) return negate(b);
  if (b == true_) return negate(a);
  if (a == b) return f;
  if (a == negate(b)) return true_;
  const Lit g = fresh();
  solver_.add_clause({negate(g), a, b});
  solver_.add_clause({negate(g), negate(a), negate(b)});
  solver_.add_clause({g, negate(a), b});
  solver_.add_clause({g, a, negate(b)});
  return g;
}

Lit BitBlaster::mux(Lit s, Lit t, Lit e) {
  if (s == true_ || t == e) return t;
  if (s == false_lit()) return e;
  if (t == true_) return or2(s, e);
  if (t == false_lit()) return and2(negate(s), e);
  if (e == true_) return or2(negate(s), t);
  if (e == false_lit()) return and2(s, t);
  const Lit g = fresh();
  solver_.add_clause({negate(s), negate(t), g});
  solver_.add_clause({negate(s), t, negate(g)});
  solver_.add_clause({s, negate(e), g});
  solver_.add_clause({s, e, negate(g)});
  return g;
}

Lit BitBlaster::majority(Lit a, Lit b, Lit c) {
  return or2(and2(a, b), and2(c, or2(a, b)));
}

BitBlaster::Bits BitBlaster::constant(std::uint32_t value) {
  Bits out(width_);
  for (unsigned i = 0; i < width_; ++i) out[i] = ((value >> i) & 1u) ? true_ : false_lit();
  return out;
}

BitBlaster::Bits BitBlaster::add(const Bits& a, const Bits& b, Lit carry) {
  Bits out(width_);
  for (unsigned i = 0; i < width_; ++i) {
    const Lit half = xor2(a[i], b[i]);
    out[i] = xor2(half, carry);
    if (i + 1 < width_) carry = majority(a[i], b[i], carry);
  }
  return out;
}

BitBlaster::Bits BitBlaster::mul(const Bits& a, const Bits& b) {
  Bits acc = constant(0);
  for (unsigned i = 0; i < width_; ++i) {
    if (b[i] == false_lit()) continue;
    Bits addend(width_, false_lit());
    for (unsigned j = i; j < width_; ++j) addend[j] = and2(a[j - i], b[i]);
    acc = add(acc, addend, false_lit());
  }
  return acc;
}

BitBlaster::Bits BitBlaster::shift(Op op, const Bits& a, const Bits& b) {
  const Lit fill = op == Op::BvAshr ? a[width_ - 1] : false_lit();
  Bits cur = a;
  unsigned k = 0;
  for (; k < width_ && (1u << k) < width_; ++k) {
    const unsigned s = 1u << k;
    Bits next(width_);
    for (unsigned j = 0; j < width_; ++j) {
      Lit moved;
      if (op == Op::BvShl) {
        moved = j >= s ? cur[j - s] : false_lit();
      } else {
        moved = j + s < width_ ? cur[j + s] : fill;
      }
      next[j] = mux(b[k], moved, cur[j]);
    }
    cur = std::move(next);
  }
  Lit overflow = false_lit();
  for (; k < width_; ++k) overflow = or2(overflow, b[k]);
  for (unsigned j = 0; j < width_; ++j) cur[j] = mux(overflow, fill, cur[j]);
  return cur;
}

Lit BitBlaster::equal(const Bits& a, const Bits& b) {
  Lit acc = true_;
  for (unsigned i = 0; i < width_; ++i) acc = and2(acc, negate(xor2(a[i], b[i])));
  return acc;
}

Lit BitBlaster::unsigned_less(const Bits& a, const Bits& b) {
  // a < b iff a + ~b + 1 produces no carry out
  Lit carry = true_;
  for (unsigned i = 0; i < width_; ++i) carry = majority(a[i], negate(b[i]), carry);
  return negate(carry);
}

Lit BitBlaster::signed_less(const Bits& a, const Bits& b) {
  Bits fa = a, fb = b;
  fa[width_ - 1] = negate(fa[width_ - 1]);
  fb[width_ - 1] = negate(fb[width_ - 1]);
  return unsigned_less(fa, fb);
}

Lit BitBlaster::blast(const Expr& e) {
  if (e.sort() != Sort::Bool) throw Error(Errc::TypeMismatch, "bit-blasting a non-Boolean term");
  const std::size_t n = e.size();
  std::vector<Bits> bv(n);
  std::vector<Lit> bl(n, false_lit());
  for (std::size_t idx = n; idx-- > 0;) {
    const Node& node = e.node(idx);
    auto B = [&](int k) -> const Bits& { return bv[node.kids[k]]; };
    auto L = [&](int k) { return bl[node.kids[k]]; };
    switch (node.op) {
      case Op::Var:
        bv[idx] = var_bits(node.imm);
        break;
      case Op::Const:
        bv[idx] = constant(node.imm & width_mask(width_));
        break;
      case Op::BvNot: {
        Bits out = B(0);
        for (Lit& l : out) l = negate(l);
        bv[idx] = std::move(out);
        break;
      }
      case Op::BvNeg: {
        Bits inv = B(0);
        for (Lit& l : inv) l = negate(l);
        bv[idx] = add(inv, constant(0), true_);
        break;
      }
      case Op::BvAdd:
        bv[idx] = add(B(0), B(1), false_lit());
        break;
      case Op::BvSub: {
        Bits inv = B(1);
        for (Lit& l : inv) l = negate(l);
        bv[idx] = add(B(0), inv, true_);
        break;
      }
      case Op::BvMul:
        bv[idx] = mul(B(0), B(1));
        break;
      case Op::BvAnd:
      case Op::BvOr:
      case Op::BvXor: {
        Bits out(width_);
        for (unsigned i = 0; i < width_; ++i) {
          const Lit a = B(0)[i], b = B(1)[i];
          out[i] = node.op == Op::BvAnd ? and2(a, b) : node.op == Op::BvOr ? or2(a, b) : xor2(a, b);
        }
        bv[idx] = std::move(out);
        break;
      }
      case Op::BvShl:
      case Op::BvLshr:
      case Op::BvAshr:
        bv[idx] = shift(node.op, B(0), B(1));
        break;
      case Op::BvEq:
        bl[idx] = equal(B(0), B(1));
        break;
      case Op::BvUlt:
        bl[idx] = unsigned_less(B(0), B(1));
        break;
      case Op::BvUle:
        bl[idx] = negate(unsigned_less(B(1), B(0)));
        break;
      case Op::BvUgt:
        bl[idx] = unsigned_less(B(1), B(0));
        break;
      case Op::BvUge:
        bl[idx] = negate(unsigned_less(B(0), B(1)));
        break;
      case Op::BvSlt:
        bl[idx] = signed_less(B(0), B(1));
        break;
      case Op::BvSle:
        bl[idx] = negate(signed_less(B(1), B(0)));
        break;
      case Op::BvSgt:
        bl[idx] = signed_less(B(1), B(0));
        break;
      case Op::BvSge:
        bl[idx] = negate(signed_less(B(0), B(1)));
        break;
      case Op::And:
        bl[idx] = and2(L(0), L(1));
        break;
      case Op::Or:
        bl[idx] = or2(L(0), L(1));
        break;
      case Op::Not:
        bl[idx] = negate(L(0));
        break;
      case Op::Ite:
        if (node.sort == Sort::Bool) {
          bl[idx] = mux(L(0), L(1), L(2));
        } else {
          Bits out(width_);
          for (unsigned i = 0; i < width_; ++i) out[i] = mux(L(0), B(1)[i], B(2)[i]);
          bv[idx] = std::move(out);
        }
        break;
    }
    // children are no longer needed once the parent is built
    for (std::size_t k = 0; k < node.arity; ++k) {
      Bits().swap(bv[node.kids[k]]);
    }
  }
  return bl[0];
}

}  // namespace invsynth
