#include <gtest/gtest.h>

#include <functional>

#include "invsynth/error.hpp"
#include "invsynth/expr.hpp"
#include "invsynth/smtlib.hpp"
#include "invsynth/tokens.hpp"
#include "support.hpp"

using namespace invsynth;
using testing_support::ExprGen;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

Program P(std::string_view text, std::size_t params = 1) { return parse_program_text(text, params); }

}  // namespace

TEST(Vocabulary, HasFiftyTokensInFixedOrder) {
  const auto vocab = vocabulary();
  ASSERT_EQ(vocab.size(), 50u);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    EXPECT_EQ(vocab[i].index(), i);
    EXPECT_EQ(Token::from_text(vocab[i].text()), vocab[i]);
  }
  EXPECT_EQ(vocab[0].text(), "<s>");
  EXPECT_EQ(vocab[1].text(), "</s>");
  EXPECT_EQ(vocab[4].text(), "v0");
  EXPECT_EQ(vocab[10].text(), "#0");
  EXPECT_EQ(vocab[25].text(), "#F");
  EXPECT_EQ(vocab[26].text(), "bvnot");
  EXPECT_EQ(vocab[49].text(), "ite");
  int nibbles = 0;
  for (const Token& t : vocab) nibbles += t.kind() == TokenKind::Nibble;
  EXPECT_EQ(nibbles, 16);
  EXPECT_EQ(code_of([] { Token::from_index(50); }), Errc::UnknownToken);
  EXPECT_EQ(code_of([] { Token::from_text("v6"); }), Errc::UnknownToken);
  EXPECT_EQ(code_of([] { Token::from_text("#a"); }), Errc::UnknownToken);
}

TEST(ParseTokens, Examples) {
  const Program a = P("<s> ( bvult v0 #8 ) </s>");
  EXPECT_EQ(a.expr(), Expr::make(Op::BvUlt, Expr::var(0), Expr::constant(8)));
  EXPECT_EQ(code_of([] { P("<s> ( bvadd v0 ) </s>"); }), Errc::ArityMismatch);
  const Program b = P("<s> ( bvugt v0 #1 #F ) </s>");
  EXPECT_EQ(b.expr(), Expr::make(Op::BvUgt, Expr::var(0), Expr::constant(0x1F)));
}

TEST(ParseTokens, Errors) {
  EXPECT_EQ(code_of([] { P("( bvult v0 #8 ) </s>"); }), Errc::MissingDelimiter);
  EXPECT_EQ(code_of([] { P("<s> ( bvult v0 #8 )"); }), Errc::MissingDelimiter);
  EXPECT_EQ(code_of([] { P("<s> ( bvult v0 #8 </s>"); }), Errc::UnbalancedParens);
  EXPECT_EQ(code_of([] { P("<s> ( bvult v0 #8 ) ) </s>"); }), Errc::UnbalancedParens);
  EXPECT_EQ(code_of([] { P("<s> ( bvadd v0 #1 ) </s>"); }), Errc::TypeMismatch);
  EXPECT_EQ(code_of([] { P("<s> ( and v0 v0 ) </s>"); }), Errc::TypeMismatch);
  EXPECT_EQ(code_of([] { P("<s> ( bvult v0 #1 #2 #3 #4 #5 #6 #7 #8 #9 ) </s>"); }),
            Errc::TypeMismatch);
  EXPECT_EQ(code_of([] { P("<s> </s>"); }), Errc::ArityMismatch);
  EXPECT_EQ(code_of([] { P("<s> ( v0 ) </s>"); }), Errc::ArityMismatch);
  EXPECT_EQ(code_of([] { P("<s> bvult v0 #8 </s>"); }), Errc::ArityMismatch);
  EXPECT_EQ(code_of([] { P("<s> ( bvult v1 #8 ) </s>", 1); }), Errc::ArityMismatch);
  EXPECT_EQ(code_of([] { tokenize("<s> ( bvfoo v0 ) </s>"); }), Errc::UnknownToken);
  EXPECT_EQ(code_of([] { P("<s> ( not ( bveq v0 v0 ) ) <s> </s>"); }), Errc::MissingDelimiter);
}

TEST(ParseTokens, MaxConstantFitsAndInfersArity) {
  const Program p = parse_program_text("<s> ( bveq v3 #F #F #F #F #F #F #F #F ) </s>");
  EXPECT_EQ(p.param_count(), 4u);
  EXPECT_EQ(p.expr().node(2).imm, 0xFFFFFFFFu);
}

TEST(Eval, Examples) {
  EXPECT_TRUE(eval(P("<s> ( bveq ( bvadd v0 #1 ) #0 ) </s>"), InputAssignment{0xFFFFFFFF}));
  EXPECT_TRUE(eval(P("<s> ( bvslt v0 #0 ) </s>"), InputAssignment{0xFFFFFFFF}));
  EXPECT_TRUE(eval(P("<s> ( bvult ( bvshl v0 #2 #0 ) #1 ) </s>"), InputAssignment{5}));
}

TEST(Eval, ShiftSemantics) {
  for (unsigned w : {4u, 7u, 32u}) {
    const std::uint32_t m = width_mask(w);
    const std::uint32_t sign = 1u << (w - 1);
    EXPECT_EQ(apply_op(Op::BvShl, 1, w, 0, w), 0u);
    EXPECT_EQ(apply_op(Op::BvLshr, m, w, 0, w), 0u);
    EXPECT_EQ(apply_op(Op::BvAshr, sign, w, 0, w), m);
    EXPECT_EQ(apply_op(Op::BvAshr, sign - 1, w + 5, 0, w), 0u);
    EXPECT_EQ(apply_op(Op::BvAshr, sign, 1, 0, w), (sign | (sign >> 1)) & m);
    EXPECT_EQ(apply_op(Op::BvShl, 1, w - 1, 0, w), sign);
    EXPECT_EQ(apply_op(Op::BvLshr, sign, w - 1, 0, w), 1u);
  }
  EXPECT_EQ(apply_op(Op::BvShl, 1, 0xFFFFFFFF, 0, 32), 0u);
}

TEST(Eval, ReducedWidthArithmetic) {
  EXPECT_EQ(apply_op(Op::BvAdd, 15, 1, 0, 4), 0u);
  EXPECT_EQ(apply_op(Op::BvSub, 0, 1, 0, 4), 15u);
  EXPECT_EQ(apply_op(Op::BvMul, 5, 7, 0, 4), 35u & 15u);
  EXPECT_EQ(apply_op(Op::BvNeg, 1, 0, 0, 4), 15u);
  EXPECT_EQ(apply_op(Op::BvNot, 0, 0, 0, 4), 15u);
  EXPECT_EQ(apply_op(Op::BvSlt, 8, 7, 0, 4), 1u);
  EXPECT_EQ(apply_op(Op::BvUlt, 8, 7, 0, 4), 0u);
  EXPECT_EQ(apply_op(Op::BvSge, 7, 8, 0, 4), 1u);
  // constants are truncated to the width
  const Program p = P("<s> ( bveq v0 #1 #3 ) </s>");
  EXPECT_TRUE(eval(p, InputAssignment{3}, 4));
  EXPECT_FALSE(eval(p, InputAssignment{3}, 8));
}

TEST(Eval, ArityIsChecked) {
  const Program p = P("<s> ( bvult v0 #8 ) </s>", 2);
  EXPECT_EQ(code_of([&] { eval(p, InputAssignment{1}); }), Errc::ArityMismatch);
  EXPECT_EQ(code_of([&] { eval(p, InputAssignment{1, 2, 3}); }), Errc::ArityMismatch);
  EXPECT_NO_THROW(eval(p, InputAssignment{1, 2}));
}

TEST(EvalTrace, Examples) {
  const Program flat = P("<s> ( bvult v0 #8 ) </s>");
  const auto [r0, rec0] = eval_trace(flat, InputAssignment{3});
  EXPECT_TRUE(r0);
  EXPECT_TRUE(rec0.empty());

  const Program p = P("<s> ( ite ( bvult v0 #8 ) ( bveq v1 #0 ) ( bvugt v1 #4 ) ) </s>", 2);
  const auto [r1, rec1] = eval_trace(p, InputAssignment{3, 0});
  EXPECT_TRUE(r1);
  EXPECT_EQ(rec1, (BranchRecord{{0, Branch::Then}}));
  const auto [r2, rec2] = eval_trace(p, InputAssignment{9, 7});
  EXPECT_TRUE(r2);
  EXPECT_EQ(rec2, (BranchRecord{{0, Branch::Else}}));
}

TEST(EvalTrace, OnlyActivePathIsRecorded) {
  const Program p = P(
      "<s> ( ite ( bvult v0 #8 ) ( ite ( bveq v0 #0 ) ( bveq v0 v0 ) ( bvult v0 #2 ) ) "
      "( ite ( bveq v0 #9 ) ( bveq v0 v0 ) ( bvult v0 #2 ) ) ) </s>");
  const auto [r, rec] = eval_trace(p, InputAssignment{9});
  EXPECT_TRUE(r);
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0], (BranchDecision{0, Branch::Else}));
  EXPECT_EQ(p.expr().node(rec[1].node).op, Op::Ite);
  EXPECT_EQ(rec[1].branch, Branch::Then);
}

TEST(PathCondition, ConjoinsEnclosingGuards) {
  const Program p = P(
      "<s> ( ite ( bvult v0 #8 ) ( ite ( bveq v0 #0 ) ( bveq v0 v0 ) ( bvult v0 #2 ) ) "
      "( bvult v0 #3 ) ) </s>");
  const Expr& e = p.expr();
  EXPECT_EQ(path_condition(e, 0), Expr::literal(true));
  // the nested ite sits in the then-branch of the root
  const std::uint32_t inner = e.root().kids[1];
  EXPECT_EQ(path_condition(e, inner), e.child(0));
  const std::uint32_t inner_else = e.node(inner).kids[2];
  const Expr pc = path_condition(e, inner_else);
  for (std::uint32_t x = 0; x < 16; ++x) {
    const bool expected = x < 8 && x != 0;
    EXPECT_EQ(eval_expr(pc, InputAssignment{x}, 4) != 0, expected) << x;
  }
}

TEST(Smtlib, Examples) {
  const std::vector<std::string> x{"x"};
  const std::vector<std::string> xy{"x", "y"};
  EXPECT_EQ(to_smtlib(P("<s> ( bvult v0 #8 ) </s>"), x), "(bvult x #x00000008)");
  EXPECT_EQ(to_smtlib(P("<s> ( not ( bveq v0 v1 ) ) </s>", 2), xy), "(not (= x y))");
  const Program konst(Expr::make(Op::BvEq, Expr::constant(0), Expr::constant(0)), 1);
  EXPECT_EQ(to_smtlib(konst, x), "(= #x00000000 #x00000000)");
  EXPECT_EQ(code_of([&] { to_smtlib(konst, xy); }), Errc::ArityMismatch);
  EXPECT_EQ(smt_bv_literal(5, 4), "#x5");
  EXPECT_EQ(smt_bv_literal(5, 6), "#b000101");
  EXPECT_EQ(smt_bv_literal(0x1F3, 8), "#xf3");
}

TEST(Expr, TypingIsCheckedOnConstruction) {
  EXPECT_EQ(code_of([] { Expr::make(Op::BvAdd, Expr::var(0)); }), Errc::ArityMismatch);
  EXPECT_EQ(code_of([] { Expr::make(Op::And, Expr::var(0), Expr::var(1)); }),
            Errc::TypeMismatch);
  EXPECT_EQ(code_of([] {
              Expr::make(Op::Ite, Expr::var(0), Expr::var(0), Expr::var(1));
            }),
            Errc::TypeMismatch);
  EXPECT_EQ(code_of([] {
              Expr::make(Op::Ite, Expr::literal(true), Expr::var(0), Expr::literal(true));
            }),
            Errc::TypeMismatch);
  EXPECT_EQ(code_of([] { Program(Expr::var(0), 1); }), Errc::TypeMismatch);
}

TEST(Expr, SubtreeAndVarHelpers) {
  const Program p = P("<s> ( and ( bvult v0 #8 ) ( bveq v1 ( bvadd v0 #1 ) ) ) </s>", 2);
  const Expr& e = p.expr();
  EXPECT_EQ(e.var_bound(), 2u);
  EXPECT_EQ(e.count(Op::Var), 3u);
  EXPECT_EQ(e.child(0), Expr::make(Op::BvUlt, Expr::var(0), Expr::constant(8)));
  const Expr shifted = shift_vars(e, 2);
  EXPECT_EQ(shifted.var_bound(), 4u);
  const std::vector<Expr> binding{Expr::constant(3), Expr::constant(4)};
  const Expr closed = bind_vars(e, binding);
  EXPECT_EQ(closed.var_bound(), 0u);
  EXPECT_EQ(eval_expr(closed, {}, 32), 1u);
}

TEST(Property, TokenRoundTripTenThousandPrograms) {
  ExprGen gen(20240611, 6);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const int depth = 1 + i % 5;
    const Expr e = gen.boolean(depth);
    ASSERT_TRUE(is_token_representable(e));
    const Program p(e, 6);
    const auto tokens = print_tokens(p);
    ASSERT_EQ(tokens.size(), token_length(e));
    const Program back = parse_tokens(tokens, 6);
    ASSERT_EQ(back, p) << tokens_to_text(tokens);
    ++checked;
  }
  EXPECT_EQ(checked, 10000);
}

TEST(Property, AdjacentConstantsHaveNoTokenForm) {
  const Program p(Expr::make(Op::BvUlt, Expr::constant(1), Expr::constant(2)), 1);
  EXPECT_FALSE(is_token_representable(p.expr()));
  EXPECT_EQ(code_of([&] { print_tokens(p); }), Errc::NotRepresentable);
  const Program q(Expr::make(Op::BvUlt, Expr::var(6), Expr::constant(2)), 7);
  EXPECT_EQ(code_of([&] { print_tokens(q); }), Errc::NotRepresentable);
}

TEST(Property, EvaluationIsTotal) {
  ExprGen gen(77, 3, false);
  for (int i = 0; i < 5000; ++i) {
    const Program p(gen.boolean(1 + i % 6), 3);
    for (unsigned w : {2u, 5u, 8u, 32u}) {
      const InputAssignment in{gen.input(), gen.input(), gen.input()};
      const auto [value, rec] = eval_trace(p, in, w);
      ASSERT_EQ(value, eval(p, in, w));
    }
  }
}
