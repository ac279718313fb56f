#ifndef INVSYNTH_SMTLIB_HPP
#define INVSYNTH_SMTLIB_HPP

#include <cstdint>
#include <span>
#include <string>

#include "invsynth/expr.hpp"

namespace invsynth {

// SMT-LIB2 literal for `value` at `width` bits: #x with width/4 digits when
// the width is a multiple of 4, #b otherwise. The value is truncated first.
std::string smt_bv_literal(std::uint32_t value, unsigned width = 32);

// SMT-LIB2 term over (_ BitVec width) variables named by `names`. Denotes
// the same function as eval_expr at that width.
std::string to_smtlib(const Expr& e, std::span<const std::string> names,
                      unsigned width = 32);

// Throws ArityMismatch unless names.size() == p.param_count().
std::string to_smtlib(const Program& p, std::span<const std::string> names,
                      unsigned width = 32);

std::string smt_sort(unsigned width);

}  // namespace invsynth

#endif  // INVSYNTH_SMTLIB_HPP
