// Training corpus generation: random predicates under syntactic rules,
// solver-based ite pruning, removal of constant programs, and examples that
// exercise every feasible branch.

#ifndef INVSYNTH_TRAINGEN_HPP
#define INVSYNTH_TRAINGEN_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "invsynth/example_gen.hpp"
#include "invsynth/expr.hpp"
#include "invsynth/oracle.hpp"
#include "invsynth/synth.hpp"

namespace invsynth {

struct GenConstraints {
  std::size_t max_ops = 5;
  std::size_t max_params = 3;
  std::size_t max_arbitrary_consts = 1;  // besides 0 and 1
  std::size_t max_tokens = kMaxProgramTokens;
  unsigned width = 32;
  GrammarWeights weights = uniform_weights();

  // Throws InvalidArgument.
  void validate() const;
};

// Number of operator nodes (everything but variables and constants).
std::size_t op_count(const Expr& e);

// True iff `p` obeys the generation rules: no operator whose operands are
// all variable-free, no shift by a constant >= width, token-representable
// within max_tokens, and at most max_arbitrary_consts constants besides 0
// and 1.
bool follows_rules(const Program& p, const GenConstraints& c);

// A predicate with between 1 and max_ops operators over 1..max_params
// parameters, chosen uniformly, with productions drawn by weight.
Program gen_program(std::uint64_t seed, const GenConstraints& c);

struct PruneResult {
  Program program;
  bool flagged = false;  // some condition check came back Unknown
};

// Replaces every ite without nested ites whose condition (or its negation)
// is unsatisfiable by the branch that is always taken, until none is left.
PruneResult prune_ite(const Program& p, Oracle& oracle, unsigned width);

// True iff `p` or its negation is unsatisfiable; nullopt on Unknown.
std::optional<bool> is_trivial(const Program& p, Oracle& oracle, unsigned width);

// Reachable branch directions of `p` as (ite node, then?) pairs, from
// eval_trace on one input.
std::vector<std::pair<std::uint32_t, bool>> covered_branches(const Program& p,
                                                             const InputAssignment& x,
                                                             unsigned width);

// Up to `count` examples with distinct inputs. Branch directions that the
// random inputs miss are forced through the solver where feasible; the
// remaining quota is random.
std::vector<IOExample> gen_informative_examples(const Program& p, std::size_t count,
                                                std::uint64_t seed, Oracle& oracle,
                                                unsigned width);

struct CorpusRecord {
  Program program;
  std::vector<IOExample> examples;
  bool flagged = false;
};

// {"tokens": [...], "param_count": p, "examples": [{"in": [...], "out": b}]}
std::string corpus_line(const CorpusRecord& r);

struct CorpusConfig {
  std::size_t count = 1000;
  GenConstraints constraints;
  std::size_t examples = 10;
  std::uint64_t seed = 0;
  std::size_t shards = 1;
  SolverConfig solver;
};

struct CorpusStats {
  std::size_t generated = 0;
  std::size_t discarded = 0;
  std::size_t emitted = 0;
  std::size_t trivial = 0;
  std::size_t duplicates = 0;
  std::size_t invalid = 0;  // rule broken after pruning
  std::size_t flagged = 0;  // emitted despite an Unknown solver answer

  std::string summary() const;
};

// Writes one record per line to `out` in generation order. The output
// depends on the seed but not on the number of shards.
CorpusStats gen_corpus(const CorpusConfig& cfg, std::ostream& out);

}  // namespace invsynth

#endif  // INVSYNTH_TRAINGEN_HPP
