#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invsynth/error.hpp"
#include "invsynth/traingen.hpp"

namespace invsynth::cli {

namespace {

constexpr int kUsage = 2;

struct RunArgs {
  std::vector<std::string> benchmarks;
  std::string mode = "cegns";
  std::size_t beam = 100;
  std::size_t progs = 100;
  std::size_t examples = 10;
  std::size_t cex_buffer = 50;
  std::string heuristic;
  double timeout = 600;
  std::uint64_t seed = 0;
  std::string synth = "enum";
  std::string solver = "auto";
  std::string solver_cmd = "z3 -in";
  std::size_t max_iterations = 1000;
  std::string transcript;
  bool no_reachability = false;
  std::size_t jobs = 1;
};

struct TraingenArgs {
  std::size_t count = 1000;
  std::size_t max_ops = 5;
  std::size_t params = 3;
  std::size_t consts = 1;
  std::size_t examples = 10;
  std::string out = "-";
  std::uint64_t seed = 0;
  std::size_t shards = 1;
  unsigned width = 32;
  std::string solver = "bitblast";
  std::string solver_cmd = "z3 -in";
};

struct VerifyArgs {
  std::string benchmark;
  std::string invariant;
  std::string solver = "auto";
  std::string solver_cmd = "z3 -in";
};

void usage_error(const std::string& msg) { std::cerr << "invsynth: " << msg << '\n'; }

std::vector<std::string> tag_transcript(const std::string& benchmark,
                                        const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const std::string& line : lines) {
    nlohmann::ordered_json j;
    j["benchmark"] = benchmark;
    const auto record = nlohmann::ordered_json::parse(line);
    for (const auto& [k, v] : record.items()) j[k] = v;
    out.push_back(j.dump());
  }
  return out;
}

int cmd_run(const RunArgs& a) {
  EngineConfig cfg;
  cfg.mode = a.mode == "egns" ? Mode::Egns : Mode::Cegns;
  cfg.beam = a.beam;
  cfg.progs = a.progs;
  cfg.init_examples = a.examples;
  cfg.cex_buffer_cap = a.cex_buffer;
  if (!a.heuristic.empty()) {
    cfg.heuristic = parse_heuristic(a.heuristic);
    if (!cfg.heuristic) {
      usage_error("unknown heuristic '" + a.heuristic + "'");
      return kUsage;
    }
  }
  if (!(a.timeout > 0)) {
    usage_error("--timeout must be positive");
    return kUsage;
  }
  cfg.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout * 1000));
  cfg.seed = a.seed;
  cfg.max_iterations = a.max_iterations;
  cfg.track_reachable = !a.no_reachability;

  std::vector<InvariantSpec> specs;
  try {
    cfg.validate();
    for (const std::string& path : a.benchmarks) specs.push_back(load_benchmark(path));
    for (const InvariantSpec& s : specs) {
      synthesizer_for(a.synth, s);
      solver_for(a.solver, a.solver_cmd, s.state_bits());
    }
  } catch (const Error& e) {
    usage_error(e.what());
    return kUsage;
  }

  const std::size_t n = specs.size();
  std::vector<std::optional<std::string>> reports(n);
  std::vector<std::vector<std::string>> transcripts(n);
  std::atomic<std::size_t> next_job{0};
  std::atomic<bool> any_solved{false};
  std::mutex out_mutex;
  std::size_t next_out = 0;

  auto worker = [&] {
    for (std::size_t i; (i = next_job++) < n;) {
      const InvariantSpec& spec = specs[i];
      RunResult r;
      try {
        auto synth = synthesizer_for(a.synth, spec);
        auto oracle = make_oracle(solver_for(a.solver, a.solver_cmd, spec.state_bits()));
        r = run_engine(spec, cfg, *synth, *oracle);
      } catch (const Error& e) {
        r.status = RunStatus::Unknown;
        r.reason = e.what();
      }
      if (r.status == RunStatus::Solved) any_solved = true;
      std::lock_guard<std::mutex> lock(out_mutex);
      std::cerr << a.benchmarks[i] << ": " << run_status_name(r.status)
                << (r.reason.empty() ? "" : " (" + r.reason + ")") << " after "
                << r.iterations << " iterations, " << r.wall_time_s << " s\n";
      reports[i] = report_line(a.benchmarks[i], spec, r);
      transcripts[i] = tag_transcript(a.benchmarks[i], r.transcript);
      for (; next_out < n && reports[next_out]; ++next_out) {
        std::cout << *reports[next_out] << '\n' << std::flush;
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(a.jobs, 1, n);
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (!a.transcript.empty()) {
    std::ofstream f(a.transcript);
    for (const auto& lines : transcripts) {
      for (const auto& line : lines) f << line << '\n';
    }
    if (!f) {
      std::cerr << "invsynth: cannot write " << a.transcript << '\n';
      return 1;
    }
  }
  return any_solved ? 0 : 1;
}

int cmd_traingen(const TraingenArgs& a) {
  CorpusConfig cfg;
  cfg.count = a.count;
  cfg.constraints.max_ops = a.max_ops;
  cfg.constraints.max_params = a.params;
  cfg.constraints.max_arbitrary_consts = a.consts;
  cfg.constraints.width = a.width;
  cfg.examples = a.examples;
  cfg.seed = a.seed;
  cfg.shards = a.shards;
  try {
    if (a.count == 0) throw Error(Errc::InvalidArgument, "--count must be positive");
    if (a.shards == 0) throw Error(Errc::InvalidArgument, "--shards must be positive");
    cfg.constraints.validate();
    cfg.solver = solver_for(a.solver, a.solver_cmd, static_cast<unsigned>(a.params * a.width));
  } catch (const Error& e) {
    usage_error(e.what());
    return kUsage;
  }

  std::ofstream file;
  if (a.out != "-") {
    file.open(a.out);
    if (!file) {
      std::cerr << "invsynth: cannot open " << a.out << '\n';
      return 1;
    }
  }
  std::ostream& out = a.out == "-" ? std::cout : file;
  try {
    const CorpusStats stats = gen_corpus(cfg, out);
    out.flush();
    if (!out) throw Error(Errc::IoError, "write failed");
    std::cerr << stats.summary() << '\n';
  } catch (const Error& e) {
    std::cerr << "invsynth: " << e.what() << '\n';
    return e.code() == Errc::InvalidArgument ? kUsage : 1;
  }
  return 0;
}

int cmd_verify(const VerifyArgs& a) {
  std::optional<InvariantSpec> spec;
  std::optional<Program> inv;
  std::unique_ptr<Oracle> oracle;
  try {
    spec = load_benchmark(a.benchmark);
    inv = parse_invariant_text(*spec, a.invariant);
    oracle = make_oracle(solver_for(a.solver, a.solver_cmd, spec->state_bits()));
  } catch (const Error& e) {
    usage_error(e.what());
    return kUsage;
  }
  const VerifyResult r = verify_invariant(*spec, *inv, *oracle);
  switch (r.status) {
    case VerifyStatus::Verified:
      std::cout << "verified\n";
      return 0;
    case VerifyStatus::Refuted:
      std::cout << "refuted: " << describe(*r.cex, *spec) << '\n';
      return 1;
    case VerifyStatus::Unknown:
      break;
  }
  std::cout << "unknown: " << r.reason << '\n';
  return 3;
}

}  // namespace

SolverConfig solver_for(const std::string& name, const std::string& command,
                        unsigned state_bits) {
  SolverConfig cfg;
  cfg.command = command;
  if (name == "brute") {
    cfg.backend = Backend::BruteForce;
  } else if (name == "bitblast") {
    cfg.backend = Backend::BitBlast;
  } else if (name == "external") {
    if (command.empty()) throw Error(Errc::InvalidArgument, "empty --solver-cmd");
    cfg.backend = Backend::External;
  } else if (name == "auto") {
    static const bool z3 = external_solver_available(command);
    if (state_bits <= cfg.brute_force_limit) {
      cfg.backend = Backend::BruteForce;
    } else {
      cfg.backend = z3 ? Backend::External : Backend::BitBlast;
    }
  } else {
    throw Error(Errc::InvalidArgument, "unknown solver '" + name + "'");
  }
  return cfg;
}

std::unique_ptr<Synthesizer> synthesizer_for(const std::string& kind, const InvariantSpec& spec) {
  if (kind == "enum") {
    EnumOptions opts;
    opts.constants = spec_constants(spec);
    return std::make_unique<EnumSynthesizer>(opts);
  }
  if (kind == "grammar") {
    GrammarOptions opts;
    opts.constants = spec_constants(spec);
    return std::make_unique<GrammarSynthesizer>(opts);
  }
  const std::string prefix = "external:";
  if (kind.rfind(prefix, 0) == 0 && kind.size() > prefix.size()) {
    return std::make_unique<ExternalSynthesizer>(kind.substr(prefix.size()));
  }
  throw Error(Errc::InvalidArgument, "unknown synthesizer '" + kind + "'");
}

std::string report_line(const std::string& benchmark, const InvariantSpec& spec,
                        const RunResult& r) {
  nlohmann::ordered_json j;
  j["benchmark"] = benchmark;
  j["status"] = run_status_name(r.status);
  j["invariant"] = r.invariant ? nlohmann::ordered_json(invariant_define_fun(spec, *r.invariant))
                               : nlohmann::ordered_json(nullptr);
  j["iterations"] = r.iterations;
  j["examples_used"] = r.examples_used;
  j["wall_time_s"] = r.wall_time_s;
  j["reason"] = r.reason;
  return j.dump();
}

int main(int argc, char** argv) {
  CLI::App app{"Counterexample-guided synthesis of bit-vector loop invariants"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Synthesize invariants for benchmark files");
  run->add_option("benchmarks", ra.benchmarks, "SyGuS invariant benchmarks")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--mode", ra.mode, "egns or cegns")
      ->check(CLI::IsMember({"egns", "cegns"}))
      ->capture_default_str();
  run->add_option("--beam", ra.beam, "Candidates requested per call")->capture_default_str();
  run->add_option("--progs", ra.progs, "Candidates forwarded to the verifier")
      ->capture_default_str();
  run->add_option("--examples", ra.examples, "Initial examples")->capture_default_str();
  run->add_option("--cex-buffer", ra.cex_buffer, "Example buffer capacity")
      ->capture_default_str();
  run->add_option("--heuristic", ra.heuristic,
                  "definitive_only, over_approximate, under_approximate or combined_random");
  run->add_option("--timeout", ra.timeout, "Seconds per benchmark")->capture_default_str();
  run->add_option("--seed", ra.seed)->capture_default_str();
  run->add_option("--synth", ra.synth, "enum, grammar or external:<command>")
      ->capture_default_str();
  run->add_option("--solver", ra.solver, "brute, bitblast, external or auto")
      ->capture_default_str();
  run->add_option("--solver-cmd", ra.solver_cmd, "External SMT solver command")
      ->capture_default_str();
  run->add_option("--max-iterations", ra.max_iterations)->capture_default_str();
  run->add_option("--transcript", ra.transcript, "Write JSON transcripts to this file");
  run->add_flag("--no-reachability", ra.no_reachability,
                "Do not track reachable states in CEGNS");
  run->add_option("--jobs", ra.jobs, "Benchmarks run in parallel")->capture_default_str();

  TraingenArgs ta;
  auto* tg = app.add_subcommand("traingen", "Generate a training corpus");
  tg->add_option("--count", ta.count, "Programs to generate")->capture_default_str();
  tg->add_option("--max-ops", ta.max_ops)->capture_default_str();
  tg->add_option("--params", ta.params, "Maximum parameter count")->capture_default_str();
  tg->add_option("--max-consts", ta.consts, "Constants allowed besides 0 and 1")
      ->capture_default_str();
  tg->add_option("--examples", ta.examples, "Examples per program")->capture_default_str();
  tg->add_option("--out", ta.out, "Output file, - for standard output")->capture_default_str();
  tg->add_option("--seed", ta.seed)->capture_default_str();
  tg->add_option("--shards", ta.shards, "Worker threads")->capture_default_str();
  tg->add_option("--width", ta.width)->capture_default_str();
  tg->add_option("--solver", ta.solver, "brute, bitblast, external or auto")
      ->capture_default_str();
  tg->add_option("--solver-cmd", ta.solver_cmd)->capture_default_str();

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Check a candidate invariant");
  ver->add_option("benchmark", va.benchmark)->required()->check(CLI::ExistingFile);
  ver->add_option("invariant", va.invariant, "Tokens, define-fun or SMT-LIB term")->required();
  ver->add_option("--solver", va.solver)->capture_default_str();
  ver->add_option("--solver-cmd", va.solver_cmd)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (run->parsed()) return cmd_run(ra);
  if (tg->parsed()) return cmd_traingen(ta);
  return cmd_verify(va);
}

}  // namespace invsynth::cli
