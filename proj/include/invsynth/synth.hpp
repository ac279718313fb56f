// Example-driven synthesizers: labelled examples in, ranked predicates out.
//
//   enum      bottom-up enumeration by size with observational equivalence
//   grammar   weighted random sampling from the predicate grammar
//   external  a separate process speaking the line-delimited JSON protocol

#ifndef INVSYNTH_SYNTH_HPP
#define INVSYNTH_SYNTH_HPP

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invsynth/example_gen.hpp"
#include "invsynth/expr.hpp"
#include "invsynth/process.hpp"
#include "invsynth/tokens.hpp"

namespace invsynth {

struct SynthesisRequest {
  std::vector<IOExample> examples;
  std::size_t beam = 1;
  std::size_t param_count = 1;
  std::size_t max_tokens = kMaxProgramTokens;
  // Not part of the wire format.
  unsigned width = 32;
  std::uint64_t seed = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct Candidate {
  Program program;
  double score = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> candidates;  // best first
  std::size_t dropped = 0;            // unparseable or over budget
};

class Synthesizer {
 public:
  virtual ~Synthesizer() = default;
  // Throws InvalidArgument on a malformed request, plus backend errors.
  CandidateSet synthesize(const SynthesisRequest& req);
  // True when equal requests always produce equal answers regardless of
  // the request seed.
  virtual bool ignores_seed() const = 0;

 protected:
  virtual CandidateSet run(const SynthesisRequest& req) = 0;
};

// True iff the program is consistent with every example at `width`.
bool satisfies_all(const Program& p, const std::vector<IOExample>& examples, unsigned width);
std::size_t count_satisfied(const Program& p, const std::vector<IOExample>& examples,
                            unsigned width);

struct EnumOptions {
  std::vector<std::uint32_t> constants;  // added to 0..15
  std::size_t max_size = 9;              // AST nodes
  std::size_t max_bank = 150000;         // stored subterms
};

// Candidates are the first `beam` consistent predicates in order of size,
// then token sequence; score = 1 / (1 + size). Throws Timeout when the
// budget runs out before any candidate is found.
CandidateSet enum_synthesize(const SynthesisRequest& req, const EnumOptions& opts = {});

// Relative weights of the grammar productions, indexed by Op (Var and Const
// included). Zero disables a production.
using GrammarWeights = std::array<double, kOpCount>;

GrammarWeights uniform_weights();

struct GrammarOptions {
  GrammarWeights weights = uniform_weights();
  std::vector<std::uint32_t> constants;  // added to 0..15
  int max_depth = 4;
};

// Samples 16 * max(beam, 100) distinct programs and ranks them by fraction
// of examples satisfied, then by log-probability. Because the pool does not
// depend on the beam, a smaller beam yields a prefix of a larger one.
CandidateSet grammar_beam_synthesize(const SynthesisRequest& req, const GrammarOptions& opts);

// Wire protocol, one JSON object per line in each direction.
std::string encode_request(const SynthesisRequest& req);
// Throws BackendFailure on malformed text. Unparseable candidates and those
// longer than max_tokens are dropped and counted.
CandidateSet decode_response(const std::string& line, const SynthesisRequest& req);

class EnumSynthesizer final : public Synthesizer {
 public:
  explicit EnumSynthesizer(EnumOptions opts = {}) : opts_(std::move(opts)) {}
  bool ignores_seed() const override { return true; }

 protected:
  CandidateSet run(const SynthesisRequest& req) override { return enum_synthesize(req, opts_); }

 private:
  EnumOptions opts_;
};

class GrammarSynthesizer final : public Synthesizer {
 public:
  explicit GrammarSynthesizer(GrammarOptions opts = {}) : opts_(std::move(opts)) {}
  bool ignores_seed() const override { return false; }

 protected:
  CandidateSet run(const SynthesisRequest& req) override {
    return grammar_beam_synthesize(req, opts_);
  }

 private:
  GrammarOptions opts_;
};

// Starts `command` on first use and keeps it for later requests. A process
// that exits, answers malformed text or misses the deadline is discarded
// and reported as BackendFailure (Timeout for the deadline).
class ExternalSynthesizer final : public Synthesizer {
 public:
  explicit ExternalSynthesizer(std::string command) : command_(std::move(command)) {}
  bool ignores_seed() const override { return true; }

 protected:
  CandidateSet run(const SynthesisRequest& req) override;

 private:
  std::string command_;
  std::unique_ptr<Process> proc_;
};

}  // namespace invsynth

#endif  // INVSYNTH_SYNTH_HPP
