#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "invsynth/error.hpp"
#include "invsynth/example_gen.hpp"
#include "support.hpp"

using namespace invsynth;
using testing_support::micro;
using testing_support::random_spec;
using testing_support::text_spec;

namespace {

std::unique_ptr<Oracle> brute(bool random_phase = true) {
  SolverConfig cfg;
  cfg.random_phase = random_phase;
  return make_oracle(cfg);
}

InvariantSpec counter(unsigned width) {
  return text_spec({"x"}, width, "(= x #b" + std::string(width, '0') + ")",
                   "(= x! (bvadd x #b" + std::string(width - 1, '0') + "1))", "true");
}

std::set<InputAssignment> input_set(const std::vector<IOExample>& ex) {
  std::set<InputAssignment> out;
  for (const auto& e : ex) out.insert(e.inputs);
  return out;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

}  // namespace

TEST(SampleRandom, WholeSmallSpace) {
  const auto spec = counter(4);
  const auto xs = sample_random_inputs(spec, 16, 3);
  ASSERT_EQ(xs.size(), 16u);
  std::set<InputAssignment> all(xs.begin(), xs.end());
  EXPECT_EQ(all.size(), 16u);
  EXPECT_EQ(code_of([&] { sample_random_inputs(spec, 17, 3); }), Errc::RetryExhausted);
}

TEST(SampleRandom, SeededAtFullWidth) {
  const auto spec = counter(32);
  const auto a = sample_random_inputs(spec, 10, 42);
  EXPECT_EQ(a, sample_random_inputs(spec, 10, 42));
  EXPECT_NE(a, sample_random_inputs(spec, 10, 43));
  EXPECT_EQ(std::set<InputAssignment>(a.begin(), a.end()).size(), 10u);
}

TEST(SampleTargeted, S1) {
  const auto spec = micro("s1");
  auto o = brute();
  const auto xs = sample_targeted_inputs(spec, 4, *o);
  ASSERT_FALSE(xs.empty());
  EXPECT_EQ(xs.front(), InputAssignment{0});
  for (std::size_t i = 1; i < xs.size(); ++i) {
    // States 8..15 are fixpoints of T that violate A.
    EXPECT_GE(xs[i][0], 8u);
  }
}

TEST(SampleTargeted, Errors) {
  auto o = brute();
  EXPECT_EQ(code_of([&] { sample_targeted_inputs(micro("s1"), 1, *o); }), Errc::InvalidArgument);
  const auto empty = text_spec({"x"}, 4, "false", "(= x! x)", "true");
  EXPECT_EQ(code_of([&] { sample_targeted_inputs(empty, 4, *o); }), Errc::NoGuaranteedExamples);
}

TEST(SampleTargeted, OneSideFillsTheOther) {
  // No successor violates A, so the whole quota comes from I.
  const auto spec = text_spec({"x"}, 4, "(bvult x #x6)", "(= x! x)", "true");
  auto o = brute();
  const auto xs = sample_targeted_inputs(spec, 4, *o);
  EXPECT_EQ(xs.size(), 4u);
  for (const auto& x : xs) EXPECT_LT(x[0], 6u);
}

TEST(Label, S1Examples) {
  const auto spec = micro("s1");
  auto o = brute();
  for (auto h : {LabelHeuristic::DefinitiveOnly, LabelHeuristic::OverApproximate,
                 LabelHeuristic::UnderApproximate, LabelHeuristic::CombinedRandom}) {
    EXPECT_EQ(label(spec, {0}, h, 1, *o), (IOExample{{0}, true}));
    EXPECT_EQ(label(spec, {9}, h, 1, *o), (IOExample{{9}, false}));
  }
  EXPECT_EQ(label(spec, {5}, LabelHeuristic::OverApproximate, 1, *o), (IOExample{{5}, true}));
  EXPECT_EQ(label(spec, {5}, LabelHeuristic::UnderApproximate, 1, *o), (IOExample{{5}, false}));
  EXPECT_EQ(label(spec, {5}, LabelHeuristic::DefinitiveOnly, 1, *o), std::nullopt);
}

TEST(Label, OverApproximationNeedsSafeSuccessors) {
  // 7 is unknown but its successor 8 violates A.
  const auto spec = text_spec({"x"}, 4, "(= x #x0)", "(= x! (bvadd x #x1))", "(bvult x #x8)");
  auto o = brute();
  EXPECT_EQ(label(spec, {7}, LabelHeuristic::OverApproximate, 1, *o), std::nullopt);
  EXPECT_EQ(label(spec, {6}, LabelHeuristic::OverApproximate, 1, *o), (IOExample{{6}, true}));
}

TEST(Label, CombinedRandomIsAFairSeededCoin) {
  const auto spec = text_spec({"x"}, 8, "false", "(= x! x)", "true");
  auto o = brute();
  std::size_t trues = 0;
  for (std::uint32_t x = 0; x < 256; ++x) {
    const auto a = label(spec, {x}, LabelHeuristic::CombinedRandom, 5, *o);
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(a, label(spec, {x}, LabelHeuristic::CombinedRandom, 5, *o));
    trues += a->output;
  }
  EXPECT_GT(trues, 96u);
  EXPECT_LT(trues, 160u);
}

TEST(Label, InfeasibleState) {
  const auto spec = text_spec({"x"}, 4, "(= x #x3)", "(= x! x)", "(bvult x #x2)");
  auto o = brute();
  EXPECT_EQ(code_of([&] { label(spec, {3}, LabelHeuristic::OverApproximate, 1, *o); }),
            Errc::InfeasibleSpec);
  EXPECT_EQ(code_of([&] {
              generate_examples(spec, 10, LabelHeuristic::CombinedRandom, 1, *o);
            }),
            Errc::InfeasibleSpec);
}

// Exhaustive width-4 sweeps: the definitive labels match the definitions,
// and no heuristic contradicts them.
TEST(Label, FaithfulOnRandomSpecs) {
  auto o = brute();
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; checked < 20; ++seed) {
    const auto spec = random_spec(seed, 1, 4);
    bool feasible = true;
    for (std::uint32_t x = 0; x < 16; ++x) {
      feasible &= !(eval(spec.init, {&x, 1}, 4) && !eval(spec.post, {&x, 1}, 4));
    }
    if (!feasible) continue;
    ++checked;
    for (std::uint32_t x = 0; x < 16; ++x) {
      const bool i = eval(spec.init, {&x, 1}, 4);
      const bool a = eval(spec.post, {&x, 1}, 4);
      const LabelInfo info = solve_output_labels(spec, std::vector<std::uint32_t>{x});
      EXPECT_EQ(info.label == Label::KnownTrue, i && a);
      EXPECT_EQ(info.label == Label::KnownFalse, !a);
      for (auto h : {LabelHeuristic::DefinitiveOnly, LabelHeuristic::OverApproximate,
                     LabelHeuristic::UnderApproximate, LabelHeuristic::CombinedRandom}) {
        const auto ex = label(spec, {x}, h, seed, *o);
        if (i && a) EXPECT_TRUE(ex && ex->output);
        if (!a) EXPECT_TRUE(ex && !ex->output);
      }
    }
  }
}

TEST(GenerateExamples, S1CombinedRandom) {
  const auto spec = micro("s1");
  auto o = brute();
  const auto ex = generate_examples(spec, 10, LabelHeuristic::CombinedRandom, 7, *o);
  EXPECT_EQ(ex.size(), 10u);
  EXPECT_EQ(input_set(ex).size(), ex.size());
  EXPECT_NE(std::find(ex.begin(), ex.end(), IOExample{{0}, true}), ex.end());
  auto o2 = brute();
  EXPECT_EQ(ex, generate_examples(spec, 10, LabelHeuristic::CombinedRandom, 7, *o2));
  for (const auto& e : ex) {
    if (e.inputs[0] >= 8) EXPECT_FALSE(e.output);
  }
}

TEST(GenerateExamples, DefinitiveOnlyMayComeUpShort) {
  const auto spec = text_spec({"x"}, 4, "false", "(= x! x)", "true");
  auto o = brute();
  EXPECT_TRUE(generate_examples(spec, 1, LabelHeuristic::DefinitiveOnly, 1, *o).empty());
  EXPECT_EQ(code_of([&] { generate_examples(spec, 0, LabelHeuristic::DefinitiveOnly, 1, *o); }),
            Errc::InvalidArgument);
}

TEST(GenerateExamples, TargetedFractionZeroIsPurelyRandom) {
  const auto spec = micro("s1");
  auto o = brute();
  ExampleGenOptions opts;
  opts.targeted_fraction = 0.0;
  const auto ex = generate_examples(spec, 16, LabelHeuristic::UnderApproximate, 2, *o, opts);
  EXPECT_EQ(ex.size(), 16u);
  EXPECT_EQ(input_set(ex).size(), 16u);
}

// Distinct inputs, determinism, and a positive example whenever I is
// satisfiable, over many random specs and all heuristics.
TEST(GenerateExamples, PropertiesOnRandomSpecs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 1 + seed % 2;
    const auto spec = random_spec(1000 + seed, n, 4);
    auto o = brute();
    const bool init_sat = o->check_sat(spec.init.expr(), n, 4).verdict == Verdict::Sat;
    for (auto h : {LabelHeuristic::DefinitiveOnly, LabelHeuristic::OverApproximate,
                   LabelHeuristic::UnderApproximate, LabelHeuristic::CombinedRandom}) {
      std::vector<IOExample> ex;
      try {
        ex = generate_examples(spec, 10, h, seed, *o);
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), Errc::InfeasibleSpec);
        continue;
      }
      EXPECT_LE(ex.size(), 10u);
      EXPECT_EQ(input_set(ex).size(), ex.size());
      auto fresh = brute();
      EXPECT_EQ(ex, generate_examples(spec, 10, h, seed, *fresh));
      if (init_sat) {
        EXPECT_TRUE(std::any_of(ex.begin(), ex.end(), [](const IOExample& e) { return e.output; }))
            << "seed " << seed << " heuristic " << heuristic_name(h);
      }
    }
  }
}

TEST(Heuristic, NamesRoundTrip) {
  for (auto h : {LabelHeuristic::DefinitiveOnly, LabelHeuristic::OverApproximate,
                 LabelHeuristic::UnderApproximate, LabelHeuristic::CombinedRandom}) {
    EXPECT_EQ(parse_heuristic(heuristic_name(h)), h);
  }
  EXPECT_EQ(parse_heuristic("sometimes"), std::nullopt);
}
