// Turning an invariant specification into labelled input/output examples.
//
// Inputs come from two sources: uniform samples over the whole state space,
// and targeted samples that land in the regions where the correct output is
// forced (models of I, and successors that violate A). Each input is then
// labelled from the specification; inputs in the unknown region are resolved
// by one of four heuristics.

#ifndef INVSYNTH_EXAMPLE_GEN_HPP
#define INVSYNTH_EXAMPLE_GEN_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "invsynth/oracle.hpp"
#include "invsynth/spec.hpp"

namespace invsynth {

struct IOExample {
  InputAssignment inputs;
  bool output = false;

  friend bool operator==(const IOExample&, const IOExample&) = default;
};

enum class LabelHeuristic { DefinitiveOnly, OverApproximate, UnderApproximate, CombinedRandom };

std::string_view heuristic_name(LabelHeuristic h);
std::optional<LabelHeuristic> parse_heuristic(std::string_view name);

// `count` distinct assignments, uniform over the full range. Throws
// RetryExhausted when the state space holds fewer than `count` states.
std::vector<InputAssignment> sample_random_inputs(const InvariantSpec& spec, std::size_t count,
                                                  std::uint64_t seed);

// ceil(count/2) models of I and floor(count/2) states x' taken from models
// of T(x, x') /\ not A(x'); either side makes up a shortfall on the other.
// I-models come first. Throws NoGuaranteedExamples when both are empty.
std::vector<InputAssignment> sample_targeted_inputs(const InvariantSpec& spec, std::size_t count,
                                                    Oracle& oracle);

// nullopt when the heuristic declines to label x. Throws InfeasibleSpec when
// I(x) holds and A(x) does not.
std::optional<IOExample> label(const InvariantSpec& spec, const InputAssignment& x,
                               LabelHeuristic h, std::uint64_t seed, Oracle& oracle);

struct ExampleGenOptions {
  double targeted_fraction = 0.5;
};

// Up to `count` examples with pairwise distinct inputs, targeted ones first.
// Reseeds `oracle` so the result depends only on the arguments. Throws
// InfeasibleSpec when I /\ not A is satisfiable.
std::vector<IOExample> generate_examples(const InvariantSpec& spec, std::size_t count,
                                         LabelHeuristic h, std::uint64_t seed, Oracle& oracle,
                                         const ExampleGenOptions& opts = {});

}  // namespace invsynth

#endif  // INVSYNTH_EXAMPLE_GEN_HPP
