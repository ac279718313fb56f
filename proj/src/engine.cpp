#include "invsynth/engine.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "invsynth/error.hpp"
#include "invsynth/rng.hpp"
#include "invsynth/tokens.hpp"

namespace invsynth {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

constexpr std::uint64_t kExampleSalt = 0x45584D50;
constexpr std::uint64_t kVerifySalt = 0x56455246;
constexpr std::uint64_t kSynthSalt = 0x53594E54;

Json example_json(const IOExample& ex) {
  return Json{{"in", ex.inputs}, {"out", ex.output}};
}

Json cex_json(const Counterexample& cex) {
  Json j;
  j["kind"] = condition_name(cex.kind);
  j["state"] = cex.state;
  if (cex.successor) j["successor"] = *cex.successor;
  j["output"] = cex.candidate_output;
  if (cex.successor_output) j["successor_output"] = *cex.successor_output;
  return j;
}

std::string_view change_name(ExampleBuffer::Change c) {
  switch (c) {
    case ExampleBuffer::Change::Added:
      return "add";
    case ExampleBuffer::Change::Replaced:
      return "replace";
    case ExampleBuffer::Change::Evicted:
      return "evict";
  }
  return "?";
}

std::string_view verify_name(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Verified:
      return "verified";
    case VerifyStatus::Refuted:
      return "refuted";
    case VerifyStatus::Unknown:
      return "unknown";
  }
  return "?";
}

class Run {
 public:
  Run(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth, Oracle& oracle,
      Mode mode)
      : spec_(spec),
        cfg_(cfg),
        synth_(synth),
        oracle_(oracle),
        mode_(mode),
        heuristic_(cfg.heuristic.value_or(mode == Mode::Egns ? LabelHeuristic::CombinedRandom
                                                             : LabelHeuristic::OverApproximate)),
        start_(Clock::now()),
        deadline_(start_ + cfg.timeout),
        buffer_(cfg.cex_buffer_cap) {}

  RunResult execute() {
    cfg_.validate();
    oracle_.set_deadline(deadline_);
    Json params = Json::array();
    for (const auto& p : spec_.params) params.push_back(p);
    record(0, "start", {{"mode", mode_name(mode_)},
                        {"width", spec_.width},
                        {"params", params},
                        {"heuristic", heuristic_name(heuristic_)}});
    try {
      loop();
    } catch (const Error& e) {
      stop(RunStatus::Unknown, e.what());
    }
    oracle_.set_deadline(std::nullopt);
    result_.wall_time_s = std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(result_);
  }

 private:
  void loop() {
    if (cfg_.max_iterations == 0) return stop(RunStatus::Unknown, "max_iterations is 0");

    std::vector<IOExample> initial;
    try {
      initial = generate_examples(spec_, cfg_.init_examples, heuristic_,
                                  derive_seed(cfg_.seed, {kExampleSalt}), oracle_,
                                  cfg_.example_options);
    } catch (const Error& e) {
      if (e.code() == Errc::InfeasibleSpec) {
        result_.status = RunStatus::NoInvariant;
        result_.reason = e.what();
        record(0, "no_invariant", {{"reason", result_.reason}});
        return;
      }
      return stop(RunStatus::Unknown, e.what());
    }
    for (IOExample& ex : initial) push(0, std::move(ex));
    oracle_.set_seed(derive_seed(cfg_.seed, {kVerifySalt}));

    for (std::size_t iter = 1;; ++iter) {
      if (iter > cfg_.max_iterations) return stop(RunStatus::Unknown, "max_iterations reached");
      if (Clock::now() >= deadline_) return stop(RunStatus::Unknown, "timeout");
      result_.iterations = iter;

      SynthesisRequest req;
      req.examples = buffer_.examples();
      req.beam = cfg_.beam;
      req.param_count = spec_.arity();
      req.width = spec_.width;
      req.seed = derive_seed(cfg_.seed, {kSynthSalt, iter});
      req.deadline = deadline_;
      result_.examples_used = req.examples.size();

      CandidateSet cs;
      try {
        cs = synth_.synthesize(req);
      } catch (const Error& e) {
        record(iter, "synth_error", {{"code", errc_name(e.code())}, {"message", e.what()}});
        if (Clock::now() >= deadline_) return stop(RunStatus::Unknown, "timeout");
        if (e.code() == Errc::BackendFailure || mode_ == Mode::Egns) {
          return stop(RunStatus::Unknown, e.what());
        }
        // No program within the synthesizer's budget fits the buffer: drop
        // the oldest quarter and try again.
        if (buffer_.size() == 0) return stop(RunStatus::Unknown, e.what());
        for (auto& ev : buffer_.evict_oldest((buffer_.size() + 3) / 4)) {
          record(iter, "buffer", buffer_json(ev));
        }
        continue;
      }
      result_.dropped += cs.dropped;
      const std::vector<Program> forwarded =
          pre_verify_filter(cs, req.examples, cfg_.progs, spec_.width);
      record(iter, "synth", {{"candidates", cs.candidates.size()},
                             {"dropped", cs.dropped},
                             {"forwarded", forwarded.size()}});

      std::vector<Counterexample> found;
      for (std::size_t rank = 0; rank < forwarded.size(); ++rank) {
        const Program& p = forwarded[rank];
        const VerifyResult vr = verify_invariant(spec_, p, oracle_);
        Json payload{{"rank", rank}, {"candidate", program_text(p)}, {"status", verify_name(vr.status)}};
        if (vr.cex) payload["cex"] = cex_json(*vr.cex);
        if (vr.status == VerifyStatus::Unknown) payload["reason"] = vr.reason;
        record(iter, "verify", std::move(payload));
        if (vr.status == VerifyStatus::Verified) {
          result_.status = RunStatus::Solved;
          result_.invariant = p;
          result_.solved_iteration = iter;
          record(iter, "solved", {{"invariant", program_text(p)}});
          return;
        }
        if (vr.status == VerifyStatus::Refuted) {
          found.push_back(*vr.cex);
          result_.counterexamples.push_back({p, *vr.cex});
        } else if (Clock::now() >= deadline_) {
          return stop(RunStatus::Unknown, "timeout");
        }
      }

      if (mode_ == Mode::Egns) return stop(RunStatus::Unknown, "no candidate verified");

      const std::set<std::pair<InputAssignment, bool>> before = contents();
      for (const Counterexample& cex : found) {
        if (cfg_.track_reachable && cex.kind == ConditionKind::Safety && reachable(cex.state)) {
          result_.status = RunStatus::NoInvariant;
          result_.reason = "reachable state " + format_assignment(cex.state, spec_.params) +
                           " violates the assertion";
          record(iter, "no_invariant", {{"reason", result_.reason}});
          return;
        }
        if (cfg_.track_reachable && cex.kind == ConditionKind::Inductiveness &&
            reachable(cex.state)) {
          reachable_.insert(*cex.successor);
          push(iter, IOExample{*cex.successor, true});
        } else {
          push(iter, cex_to_example(cex));
        }
      }
      if (contents() == before && synth_.ignores_seed()) {
        return stop(RunStatus::Unknown, "no progress: example buffer unchanged");
      }
    }
  }

  bool reachable(const InputAssignment& x) const {
    return eval(spec_.init, x, spec_.width) || reachable_.contains(x);
  }

  std::set<std::pair<InputAssignment, bool>> contents() const {
    std::set<std::pair<InputAssignment, bool>> out;
    for (const IOExample& ex : buffer_.entries()) out.emplace(ex.inputs, ex.output);
    return out;
  }

  void push(std::size_t iter, IOExample ex) {
    for (const auto& ev : buffer_.push(std::move(ex))) record(iter, "buffer", buffer_json(ev));
  }

  static Json buffer_json(const ExampleBuffer::Event& ev) {
    Json payload{{"change", change_name(ev.change)}};
    payload.update(example_json(ev.example));
    return payload;
  }

  void stop(RunStatus status, std::string reason) {
    result_.status = status;
    result_.reason = std::move(reason);
    record(result_.iterations, "stop", {{"reason", result_.reason}});
  }

  void record(std::size_t iter, std::string_view event, Json payload) {
    Json j{{"iter", iter}, {"event", event}};
    for (auto& [k, v] : payload.items()) j[k] = v;
    result_.transcript.push_back(j.dump());
  }

  const InvariantSpec& spec_;
  const EngineConfig& cfg_;
  Synthesizer& synth_;
  Oracle& oracle_;
  Mode mode_;
  LabelHeuristic heuristic_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  ExampleBuffer buffer_;
  std::set<InputAssignment> reachable_;
  RunResult result_;
};

}  // namespace

std::string_view mode_name(Mode m) { return m == Mode::Egns ? "egns" : "cegns"; }

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Solved:
      return "solved";
    case RunStatus::NoInvariant:
      return "no_invariant";
    case RunStatus::Unknown:
      return "unknown";
  }
  return "?";
}

void EngineConfig::validate() const {
  if (beam == 0) throw Error(Errc::InvalidArgument, "beam must be at least 1");
  if (progs == 0 || progs > beam) {
    throw Error(Errc::InvalidArgument, "progs must be in 1..beam");
  }
  if (init_examples == 0) throw Error(Errc::InvalidArgument, "examples must be at least 1");
  if (cex_buffer_cap < init_examples) {
    throw Error(Errc::InvalidArgument, "cex buffer must hold the initial examples");
  }
}

std::vector<ExampleBuffer::Event> ExampleBuffer::push(IOExample ex) {
  std::vector<Event> events;
  const auto same = std::find_if(entries_.begin(), entries_.end(),
                                 [&](const IOExample& e) { return e.inputs == ex.inputs; });
  const bool replaced = same != entries_.end();
  if (replaced) entries_.erase(same);
  entries_.push_back(ex);
  events.push_back({replaced ? Change::Replaced : Change::Added, std::move(ex)});
  while (entries_.size() > cap_) {
    events.push_back({Change::Evicted, entries_.front()});
    entries_.pop_front();
  }
  return events;
}

std::vector<ExampleBuffer::Event> ExampleBuffer::evict_oldest(std::size_t count) {
  std::vector<Event> events;
  while (count-- > 0 && !entries_.empty()) {
    events.push_back({Change::Evicted, entries_.front()});
    entries_.pop_front();
  }
  return events;
}

std::vector<Program> pre_verify_filter(const CandidateSet& candidates,
                                       const std::vector<IOExample>& examples, std::size_t n,
                                       unsigned width) {
  std::vector<Program> out;
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < candidates.candidates.size() && out.size() < n; ++i) {
    const Program& p = candidates.candidates[i].program;
    const std::size_t k = count_satisfied(p, examples, width);
    if (k == examples.size()) {
      out.push_back(p);
    } else if (!best || k > best_count) {
      best = i;
      best_count = k;
    }
  }
  if (out.empty() && best) out.push_back(candidates.candidates[*best].program);
  return out;
}

IOExample cex_to_example(const Counterexample& cex) {
  return {cex.state, cex.kind == ConditionKind::Initiation};
}

RunResult run_egns(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth,
                   Oracle& oracle) {
  return Run(spec, cfg, synth, oracle, Mode::Egns).execute();
}

RunResult run_cegns(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth,
                    Oracle& oracle) {
  return Run(spec, cfg, synth, oracle, Mode::Cegns).execute();
}

RunResult run_engine(const InvariantSpec& spec, const EngineConfig& cfg, Synthesizer& synth,
                     Oracle& oracle) {
  return cfg.mode == Mode::Egns ? run_egns(spec, cfg, synth, oracle)
                                : run_cegns(spec, cfg, synth, oracle);
}

}  // namespace invsynth
