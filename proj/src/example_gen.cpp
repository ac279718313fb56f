#include "invsynth/example_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "invsynth/error.hpp"
#include "invsynth/rng.hpp"

namespace invsynth {

namespace {

constexpr std::uint64_t kRandomSalt = 0x52414E44;
constexpr std::uint64_t kCoinSalt = 0x434F494E;
constexpr std::uint64_t kOracleSalt = 0x4F52434C;

InputAssignment decode_state(std::uint64_t index, std::size_t n, unsigned width) {
  InputAssignment x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<std::uint32_t>(index >> (i * width)) & width_mask(width);
  }
  return x;
}

std::uint64_t coin_seed(std::uint64_t seed, const InputAssignment& x) {
  std::uint64_t s = derive_seed(seed, {kCoinSalt});
  for (std::uint32_t v : x) s = derive_seed(s, {v});
  return s;
}

}  // namespace

std::string_view heuristic_name(LabelHeuristic h) {
  switch (h) {
    case LabelHeuristic::DefinitiveOnly:
      return "definitive_only";
    case LabelHeuristic::OverApproximate:
      return "over_approximate";
    case LabelHeuristic::UnderApproximate:
      return "under_approximate";
    case LabelHeuristic::CombinedRandom:
      return "combined_random";
  }
  return "?";
}

std::optional<LabelHeuristic> parse_heuristic(std::string_view name) {
  for (LabelHeuristic h : {LabelHeuristic::DefinitiveOnly, LabelHeuristic::OverApproximate,
                           LabelHeuristic::UnderApproximate, LabelHeuristic::CombinedRandom}) {
    if (heuristic_name(h) == name) return h;
  }
  return std::nullopt;
}

std::vector<InputAssignment> sample_random_inputs(const InvariantSpec& spec, std::size_t count,
                                                  std::uint64_t seed) {
  if (count == 0) throw Error(Errc::InvalidArgument, "count must be positive");
  const std::size_t n = spec.arity();
  const std::size_t bits = spec.state_bits();
  Rng rng(seed);

  if (bits < 63) {
    const std::uint64_t space = std::uint64_t{1} << bits;
    if (space < count) {
      throw Error(Errc::RetryExhausted, "state space has only " + std::to_string(space) +
                                            " states, " + std::to_string(count) + " requested");
    }
    if (space <= (std::uint64_t{1} << 16) && space <= 64 * std::uint64_t{count}) {
      std::vector<std::uint64_t> all(space);
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t i = 0; i < count; ++i) {
        std::swap(all[i], all[i + uniform_below(rng, space - i)]);
      }
      std::vector<InputAssignment> out;
      for (std::size_t i = 0; i < count; ++i) out.push_back(decode_state(all[i], n, spec.width));
      return out;
    }
  }

  std::vector<InputAssignment> out;
  std::set<InputAssignment> seen;
  const std::size_t max_draws = 64 * count + 64;
  for (std::size_t draws = 0; out.size() < count; ++draws) {
    if (draws == max_draws) {
      throw Error(Errc::RetryExhausted, "could not draw " + std::to_string(count) +
                                            " distinct inputs");
    }
    InputAssignment x(n);
    for (auto& v : x) v = static_cast<std::uint32_t>(rng()) & width_mask(spec.width);
    if (seen.insert(x).second) out.push_back(std::move(x));
  }
  return out;
}

std::vector<InputAssignment> sample_targeted_inputs(const InvariantSpec& spec, std::size_t count,
                                                    Oracle& oracle) {
  if (count < 2) throw Error(Errc::InvalidArgument, "targeted sampling needs count >= 2");
  const std::size_t n = spec.arity();
  const Expr bad =
      spec.trans.expr() && !shift_vars(spec.post.expr(), static_cast<std::uint32_t>(n));

  auto init_models = [&](std::size_t k) {
    return distinct_models(oracle, spec.init.expr(), n, spec.width, 0, n, k);
  };
  auto bad_successors = [&](std::size_t k) {
    std::vector<InputAssignment> out;
    for (auto& m : distinct_models(oracle, bad, 2 * n, spec.width, n, n, k)) {
      out.emplace_back(m.begin() + static_cast<std::ptrdiff_t>(n), m.end());
    }
    return out;
  };

  const std::size_t half = (count + 1) / 2;
  std::vector<InputAssignment> a = init_models(half);
  std::vector<InputAssignment> b = bad_successors(count - a.size());
  if (a.size() == half && b.size() < count - half) {
    std::vector<InputAssignment> more = init_models(count - b.size());
    if (more.size() > a.size()) a = std::move(more);
  }
  if (a.empty() && b.empty()) {
    throw Error(Errc::NoGuaranteedExamples,
                "neither I nor T /\\ not A(x') has a model");
  }

  std::vector<InputAssignment> out;
  std::set<InputAssignment> seen;
  for (auto* side : {&a, &b}) {
    for (auto& x : *side) {
      if (seen.insert(x).second) out.push_back(std::move(x));
    }
  }
  return out;
}

std::optional<IOExample> label(const InvariantSpec& spec, const InputAssignment& x,
                               LabelHeuristic h, std::uint64_t seed, Oracle& oracle) {
  const LabelInfo info = solve_output_labels(spec, x);
  if (!info.feasible) {
    throw Error(Errc::InfeasibleSpec, "I holds and A fails at " +
                                          format_assignment(x, spec.params));
  }
  switch (info.label) {
    case Label::KnownTrue:
      return IOExample{x, true};
    case Label::KnownFalse:
      return IOExample{x, false};
    case Label::Unknown:
      break;
  }
  switch (h) {
    case LabelHeuristic::DefinitiveOnly:
      return std::nullopt;
    case LabelHeuristic::OverApproximate: {
      const std::optional<bool> safe = successors_safe(spec, x, oracle);
      if (safe.value_or(false)) return IOExample{x, true};
      return std::nullopt;
    }
    case LabelHeuristic::UnderApproximate:
      return IOExample{x, false};
    case LabelHeuristic::CombinedRandom: {
      Rng coin(coin_seed(seed, x));
      return IOExample{x, (coin() & 1) != 0};
    }
  }
  return std::nullopt;
}

std::vector<IOExample> generate_examples(const InvariantSpec& spec, std::size_t count,
                                         LabelHeuristic h, std::uint64_t seed, Oracle& oracle,
                                         const ExampleGenOptions& opts) {
  if (count == 0) throw Error(Errc::InvalidArgument, "count must be positive");
  oracle.set_seed(derive_seed(seed, {kOracleSalt}));

  const std::size_t n = spec.arity();
  const SatResult bad_init =
      oracle.check_sat(spec.init.expr() && !spec.post.expr(), n, spec.width);
  if (bad_init.verdict == Verdict::Sat) {
    throw Error(Errc::InfeasibleSpec, "no invariant exists: I holds and A fails at " +
                                          format_assignment(bad_init.model, spec.params));
  }

  const double fraction = std::clamp(opts.targeted_fraction, 0.0, 1.0);
  const auto quota = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));

  std::vector<InputAssignment> inputs;
  if (quota > 0) {
    try {
      inputs = sample_targeted_inputs(spec, std::max<std::size_t>(quota, 2), oracle);
      if (inputs.size() > quota) inputs.resize(quota);
    } catch (const Error& e) {
      if (e.code() != Errc::NoGuaranteedExamples) throw;
    }
  }

  // Enough random candidates to cover duplicates and declined labels.
  std::size_t pool = 4 * count + 16;
  if (spec.state_bits() < 63) {
    pool = static_cast<std::size_t>(
        std::min<std::uint64_t>(pool, std::uint64_t{1} << spec.state_bits()));
  }
  for (auto& x : sample_random_inputs(spec, pool, derive_seed(seed, {kRandomSalt}))) {
    inputs.push_back(std::move(x));
  }

  std::vector<IOExample> out;
  std::set<InputAssignment> seen;
  for (const InputAssignment& x : inputs) {
    if (out.size() == count) break;
    if (seen.contains(x)) continue;
    if (auto ex = label(spec, x, h, seed, oracle)) {
      seen.insert(x);
      out.push_back(std::move(*ex));
    }
  }
  return out;
}

}  // namespace invsynth
