// One-shot (EGNS) and counterexample-guided (CEGNS) invariant synthesis.
//
// Transcript records are single-line JSON objects with "iter" and "event"
// first. Events, in the order they can occur:
//   start       mode, benchmark width and parameters (iter 0)
//   examples    initial example set (iter 0)
//   buffer      add / replace / evict of one example
//   synth       candidates returned, dropped, forwarded to the verifier
//   synth_error the synthesizer failed this iteration
//   verify      one forwarded candidate and its outcome (with counterexample)
//   solved / no_invariant / stop
// Records carry no timing, so equal runs give byte-identical transcripts.

#ifndef INVSYNTH_ENGINE_HPP
#define INVSYNTH_ENGINE_HPP

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "invsynth/example_gen.hpp"
#include "invsynth/oracle.hpp"
#include "invsynth/spec.hpp"
#include "invsynth/synth.hpp"

namespace invsynth {

enum class Mode { Egns, Cegns };

std::string_view mode_name(Mode m);

struct EngineConfig {
  Mode mode = Mode::Cegns;
  std::size_t beam = 100;
  std::size_t progs = 100;
  std::size_t init_examples = 10;
  std::size_t cex_buffer_cap = 50;
  // Defaults to combined_random for EGNS and over_approximate for CEGNS.
  std::optional<LabelHeuristic> heuristic;
  std::size_t max_iterations = 1000;
  std::chrono::milliseconds timeout{600000};
  std::uint64_t seed = 0;
  ExampleGenOptions example_options;
  // Keep the states known to be reachable (initial states and successors
  // found from them). An inductiveness counterexample from a reachable state
  // then adds its successor as a positive example instead of removing the
  // state, and a safety counterexample at a reachable state proves that no
  // invariant exists.
  bool track_reachable = true;

  // Throws InvalidArgument.
  void validate() const;
};

class ExampleBuffer {
 public:
  enum class Change { Added, Replaced, Evicted };
  struct Event {
    Change change;
    IOExample example;
  };

  explicit ExampleBuffer(std::size_t cap) : cap_(cap) {}

  // A duplicate input replaces the old entry and becomes the newest; the
  // oldest entries are evicted beyond the cap.
  std::vector<Event> push(IOExample ex);
  std::vector<Event> evict_oldest(std::size_t count);

  const std::deque<IOExample>& entries() const { return entries_; }
  std::vector<IOExample> examples() const { return {entries_.begin(), entries_.end()}; }
  std::size_t cap() const { return cap_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::size_t cap_;
  std::deque<IOExample> entries_;
};

// The first n candidates consistent with every example; if none is, the
// single candidate satisfying the most examples (earliest rank on ties).
std::vector<Program> pre_verify_filter(const CandidateSet& candidates,
                                       const std::vector<IOExample>& examples, std::size_t n,
                                       unsigned width);

// Initiation -> (x, true); safety and inductiveness -> (x, false).
IOExample cex_to_example(const Counterexample& cex);

enum class RunStatus { Solved, NoInvariant, Unknown };

std::string_view run_status_name(RunStatus s);

struct RefutedCandidate {
  Program candidate;
  Counterexample cex;
};

struct RunResult {
  RunStatus status = RunStatus::Unknown;
  std::optional<Program> invariant;
  std::string reason;
  std::size_t iterations = 0;
  std::size_t examples_used = 0;  // examples in the last synthesis request
  std::size_t dropped = 0;        // unusable synthesizer candidates
  double wall_time_s = 0.0;
  std::vector<std::string> transcript;
  std::vector<RefutedCandidate> counterexamples;
  // Iteration in which the invariant was found (0 if none).
  std::size_t solved_iteration = 0;
};

RunResult run_egns(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth,
                   Oracle& oracle);
RunResult run_cegns(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth,
                    Oracle& oracle);
// Dispatches on cfg.mode.
RunResult run_engine(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth,
                     Oracle& oracle);

}  // namespace invsynth

#endif  // INVSYNTH_ENGINE_HPP
