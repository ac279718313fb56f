// Tseitin encoding of predicates into CNF at a fixed width.

#ifndef INVSYNTH_BITBLAST_HPP
#define INVSYNTH_BITBLAST_HPP

#include <cstdint>
#include <vector>

#include "invsynth/expr.hpp"
#include "invsynth/sat.hpp"

namespace invsynth {

class BitBlaster {
 public:
  BitBlaster(sat::Solver& solver, unsigned width);

  // Literal equivalent to the Boolean expression `e`.
  sat::Lit blast(const Expr& e);

  // Bits of variable `index`, least significant first. Allocated on demand.
  const std::vector<sat::Lit>& var_bits(std::uint32_t index);

  bool has_var(std::uint32_t index) const {
    return index < vars_.size() && !vars_[index].empty();
  }

  sat::Lit true_lit() const { return true_; }
  sat::Lit false_lit() const { return sat::negate(true_); }

 private:
  using Bits = std::vector<sat::Lit>;

  sat::Lit fresh();
  sat::Lit and2(sat::Lit a, sat::Lit b);
  sat::Lit or2(sat::Lit a, sat::Lit b) { return sat::negate(and2(sat::negate(a), sat::negate(b))); }
  sat::Lit xor2(sat::Lit a, sat::Lit b);
  sat::Lit mux(sat::Lit s, sat::Lit t, sat::Lit e);
  sat::Lit majority(sat::Lit a, sat::Lit b, sat::Lit c);

  Bits constant(std::uint32_t value);
  Bits add(const Bits& a, const Bits& b, sat::Lit carry_in);
  Bits mul(const Bits& a, const Bits& b);
  Bits shift(Op op, const Bits& a, const Bits& b);
  sat::Lit equal(const Bits& a, const Bits& b);
  sat::Lit unsigned_less(const Bits& a, const Bits& b);
  sat::Lit signed_less(const Bits& a, const Bits& b);

  sat::Solver& solver_;
  unsigned width_;
  sat::Lit true_;
  std::vector<Bits> vars_;
};

}  // namespace invsynth

#endif  // INVSYNTH_BITBLAST_HPP
