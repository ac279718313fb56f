#ifndef INVSYNTH_TESTS_SUPPORT_HPP
#define INVSYNTH_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "invsynth/expr.hpp"
#include "invsynth/rng.hpp"
#include "invsynth/spec.hpp"
#include "invsynth/tokens.hpp"

namespace testing_support {

using namespace invsynth;

inline std::string source_path(const std::string& rel) {
  return std::string(INVSYNTH_SOURCE_DIR) + "/" + rel;
}

inline InvariantSpec micro(const std::string& name) {
  return load_benchmark(source_path("benchmarks/micro/" + name + ".sl"));
}

inline Program prog(const InvariantSpec& spec, const std::string& text) {
  return parse_invariant_text(spec, text);
}

// Benchmark from its three predicate bodies; successor variables are the
// parameter names with a trailing '!'.
inline InvariantSpec text_spec(const std::vector<std::string>& vars, unsigned width,
                               const std::string& pre, const std::string& trans,
                               const std::string& post) {
  const std::string sort = "(_ BitVec " + std::to_string(width) + ")";
  std::string state, both;
  for (const auto& v : vars) state += "(" + v + " " + sort + ")";
  both = state;
  for (const auto& v : vars) both += "(" + v + "! " + sort + ")";
  const std::string text = "(set-logic BV)\n(synth-inv inv_fun (" + state + "))\n" +
                           "(define-fun pre_fun (" + state + ") Bool " + pre + ")\n" +
                           "(define-fun trans_fun (" + both + ") Bool " + trans + ")\n" +
                           "(define-fun post_fun (" + state + ") Bool " + post + ")\n" +
                           "(inv-constraint inv_fun pre_fun trans_fun post_fun)\n(check-synth)\n";
  return parse_benchmark(text);
}

// Random well-typed expressions covering every operator, including shapes
// traingen never emits (ite over bit-vectors, deep nesting, large constants).
class ExprGen {
 public:
  ExprGen(std::uint64_t seed, std::size_t params, bool token_form = true)
      : rng_(seed), params_(params), token_form_(token_form) {}

  Expr boolean(int depth) {
    const std::uint64_t pick = depth <= 0 ? 0 : uniform_below(rng_, 10);
    if (pick < 5) {
      const Op op = static_cast<Op>(static_cast<int>(Op::BvEq) + uniform_below(rng_, 9));
      return binary_bv(op, depth - 1);
    }
    if (pick < 7) {
      const Op op = pick == 5 ? Op::And : Op::Or;
      return Expr::make(op, boolean(depth - 1), boolean(depth - 1));
    }
    if (pick == 7) return !boolean(depth - 1);
    return Expr::make(Op::Ite, boolean(depth - 1), boolean(depth - 1), boolean(depth - 1));
  }

  Expr bitvec(int depth) {
    const std::uint64_t pick = depth <= 0 ? uniform_below(rng_, 2) : uniform_below(rng_, 12);
    if (pick == 0) return Expr::var(static_cast<std::uint32_t>(uniform_below(rng_, params_)));
    if (pick == 1) return constant();
    if (pick < 4) {
      return Expr::make(pick == 2 ? Op::BvNot : Op::BvNeg, bitvec(depth - 1));
    }
    if (pick < 11) {
      const Op op = static_cast<Op>(static_cast<int>(Op::BvAdd) + uniform_below(rng_, 9));
      return binary_bv(op, depth - 1);
    }
    Expr cond = boolean(depth - 1);
    Expr then = bitvec(depth - 1);
    Expr other = bitvec(depth - 1);
    if (token_form_ && then.op() == Op::Const && other.op() == Op::Const) {
      other = Expr::var(static_cast<std::uint32_t>(uniform_below(rng_, params_)));
    }
    return Expr::make(Op::Ite, cond, then, other);
  }

  std::uint32_t input() {
    switch (uniform_below(rng_, 4)) {
      case 0:
        return static_cast<std::uint32_t>(uniform_below(rng_, 40));
      case 1:
        return 0xFFFFFFFFu - static_cast<std::uint32_t>(uniform_below(rng_, 40));
      case 2:
        return 0x80000000u ^ static_cast<std::uint32_t>(uniform_below(rng_, 40));
      default:
        return static_cast<std::uint32_t>(rng_());
    }
  }

  Rng& rng() { return rng_; }

 private:
  Expr constant() {
    switch (uniform_below(rng_, 4)) {
      case 0:
        return Expr::constant(static_cast<std::uint32_t>(uniform_below(rng_, 2)));
      case 1:
        return Expr::constant(static_cast<std::uint32_t>(uniform_below(rng_, 40)));
      case 2:
        return Expr::constant(0xFFFFFFFFu - static_cast<std::uint32_t>(uniform_below(rng_, 4)));
      default:
        return Expr::constant(static_cast<std::uint32_t>(rng_()));
    }
  }

  Expr binary_bv(Op op, int depth) {
    Expr a = bitvec(depth);
    Expr b = bitvec(depth);
    if (token_form_ && a.op() == Op::Const && b.op() == Op::Const) {
      b = Expr::var(static_cast<std::uint32_t>(uniform_below(rng_, params_)));
    }
    return Expr::make(op, a, b);
  }

  Rng rng_;
  std::size_t params_;
  bool token_form_;
};

// Random (I, T, A) over `n` variables; T ranges over the state and its
// primed copy.
inline InvariantSpec random_spec(std::uint64_t seed, std::size_t n, unsigned width) {
  ExprGen state(seed, n);
  ExprGen pair(derive_seed(seed, {1}), 2 * n);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  Expr init = state.boolean(2);
  Expr post = state.boolean(2);
  return make_spec(names, width, init, pair.boolean(2), post);
}

}  // namespace testing_support

#endif  // INVSYNTH_TESTS_SUPPORT_HPP
