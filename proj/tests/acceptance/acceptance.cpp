// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit 1 on any FAIL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "invsynth/engine.hpp"
#include "invsynth/error.hpp"
#include "invsynth/smtlib.hpp"
#include "invsynth/traingen.hpp"
#include "support.hpp"

using namespace invsynth;
using testing_support::ExprGen;
using testing_support::random_spec;
using testing_support::text_spec;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Check {
  Outcome outcome;
  std::string detail;
};

Check pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Check fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

struct Shell {
  int status;
  std::string out;
};

Shell shell(const std::string& cmd) {
  Shell r{0, {}};
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return {-1, "popen failed"};
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::unique_ptr<Oracle> brute() { return make_oracle(SolverConfig{}); }

std::unique_ptr<Oracle> bitblast(bool random_phase = false) {
  SolverConfig cfg;
  cfg.backend = Backend::BitBlast;
  cfg.random_phase = random_phase;
  return make_oracle(cfg);
}

EnumSynthesizer enum_for(const InvariantSpec& spec) {
  EnumOptions opts;
  opts.constants = spec_constants(spec);
  return EnumSynthesizer(opts);
}

std::vector<fs::path> micro_suite() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(testing_support::source_path("benchmarks/micro"))) {
    if (e.path().extension() == ".sl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Every counterexample seen by any criterion, re-checked by counterexample_soundness.
struct SeenCex {
  InvariantSpec spec;
  Program candidate;
  Counterexample cex;
};
std::vector<SeenCex> g_cex;

void collect(const InvariantSpec& spec, const RunResult& r) {
  for (const auto& rc : r.counterexamples) g_cex.push_back({spec, rc.candidate, rc.cex});
}

InputAssignment decode(std::uint64_t code, std::size_t n, unsigned width) {
  InputAssignment x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (code >> (i * width)) & width_mask(width);
  return x;
}

// First input in [0, 2^(n*width)) where `formula` holds, if any.
std::optional<InputAssignment> find_model(const Expr& formula, std::size_t n, unsigned width) {
  Evaluator ev(formula, width);
  const std::uint64_t total = std::uint64_t{1} << (n * width);
  for (std::uint64_t c = 0; c < total; ++c) {
    InputAssignment x = decode(c, n, width);
    if (ev(x)) return x;
  }
  return std::nullopt;
}

bool constant_at(const Program& p, unsigned width) {
  const std::size_t n = p.param_count();
  Evaluator ev(p.expr(), width);
  Rng rng(17);
  std::set<std::uint32_t> seen;
  InputAssignment x(n);
  for (int i = 0; i < 256 && seen.size() < 2; ++i) {
    for (auto& v : x) v = static_cast<std::uint32_t>(rng()) & width_mask(width);
    seen.insert(ev(x));
  }
  if (seen.size() == 2) return false;
  const std::uint32_t first = *seen.begin();
  return !find_model(first ? !p.expr() : p.expr(), n, width);
}

std::vector<std::string> first_iteration(const RunResult& r) {
  std::vector<std::string> lines;
  for (const auto& line : r.transcript) {
    const Json j = Json::parse(line);
    if (j["event"] == "start" || j["event"] == "stop") continue;
    if (j["iter"].get<std::size_t>() > 1) continue;
    if (j["iter"] == 1 && j["event"] == "buffer") continue;
    lines.push_back(j.dump());
  }
  return lines;
}

struct Corpus {
  std::vector<CorpusRecord> records;
  CorpusStats stats;
};

const Corpus& desk_corpus() {
  static const Corpus corpus = [] {
    CorpusConfig cfg;
    cfg.count = 10000;
    cfg.seed = 2024;
    cfg.constraints.width = 8;
    cfg.solver.backend = Backend::BitBlast;
    std::ostringstream out;
    Corpus c;
    c.stats = gen_corpus(cfg, out);
    std::istringstream in(out.str());
    for (std::string line; std::getline(in, line);) {
      const Json j = Json::parse(line);
      std::string text;
      for (const auto& t : j["tokens"]) text += t.get<std::string>() + " ";
      CorpusRecord r{parse_program_text(text, j["param_count"].get<std::size_t>()), {}, false};
      for (const auto& ex : j["examples"]) {
        InputAssignment x;
        for (const auto& v : ex["in"]) {
          x.push_back(static_cast<std::uint32_t>(std::stoul(v.get<std::string>(), nullptr, 16)));
        }
        r.examples.push_back({x, ex["out"].get<bool>()});
      }
      c.records.push_back(std::move(r));
    }
    return c;
  }();
  return corpus;
}

// ---------------------------------------------------------------------------

Check micro_suite_end_to_end() {
  const std::string oracle_script = testing_support::source_path("tests/oracles/micro_oracle.py");
  const Shell known = shell(std::string(PYTHON_EXE) + " " + quote(oracle_script) + " " +
                            quote(testing_support::source_path("benchmarks/micro")));
  if (known.status != 0) return fail("known invariants do not hold:\n" + known.out);

  const auto suite = micro_suite();
  std::size_t solved = 0;
  double slowest = 0;
  std::vector<std::string> problems;
  for (const auto& path : suite) {
    const InvariantSpec spec = load_benchmark(path.string());
    if (spec.width < 4 || spec.width > 8) problems.push_back(path.stem().string() + " width");
    EngineConfig cfg;
    cfg.timeout = std::chrono::seconds(60);
    auto synth = enum_for(spec);
    auto oracle = brute();
    const RunResult r = run_cegns(spec, cfg, synth, *oracle);
    collect(spec, r);
    if (r.status != RunStatus::Solved) {
      problems.push_back(path.stem().string() + " " + std::string(run_status_name(r.status)));
      continue;
    }
    slowest = std::max(slowest, r.wall_time_s);
    if (r.wall_time_s >= 60) problems.push_back(path.stem().string() + " too slow");
    const std::string inv = invariant_define_fun(spec, *r.invariant);
    const Shell check = shell(std::string(PYTHON_EXE) + " " + quote(oracle_script) +
                              " --invariant " + quote(inv) + " " + quote(path.string()));
    if (check.status != 0) {
      problems.push_back(path.stem().string() + " returned invalid " + inv);
      continue;
    }
    ++solved;
  }
  std::ostringstream d;
  d << solved << "/" << suite.size() << " solved and exhaustively re-verified, slowest " << slowest << " s";
  const bool ok = suite.size() >= 10 && solved * 10 >= suite.size() * 9 &&
                  std::none_of(problems.begin(), problems.end(), [](const std::string& s) {
                    return s.find("invalid") != std::string::npos ||
                           s.find("width") != std::string::npos;
                  });
  for (const auto& p : problems) d << "; " << p;
  return ok ? pass(d.str()) : fail(d.str());
}

Check egns_contained_in_cegns() {
  std::size_t egns_solved = 0, runs = 0;
  std::vector<std::string> problems;
  for (const auto& path : micro_suite()) {
    const InvariantSpec spec = load_benchmark(path.string());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      EngineConfig cfg;
      cfg.heuristic = LabelHeuristic::OverApproximate;
      cfg.seed = seed;
      cfg.timeout = std::chrono::seconds(60);
      std::array<RunResult, 2> r;
      for (Mode m : {Mode::Egns, Mode::Cegns}) {
        cfg.mode = m;
        auto synth = enum_for(spec);
        auto oracle = brute();
        r[m == Mode::Cegns] = run_engine(spec, cfg, synth, *oracle);
        collect(spec, r[m == Mode::Cegns]);
      }
      ++runs;
      if (r[0].status != RunStatus::Solved) continue;
      ++egns_solved;
      const std::string tag = path.stem().string() + "/seed " + std::to_string(seed);
      if (r[1].status != RunStatus::Solved || r[1].solved_iteration != 1) {
        problems.push_back(tag + " not solved in iteration 1");
      } else if (first_iteration(r[0]) != first_iteration(r[1])) {
        problems.push_back(tag + " transcripts differ");
      } else if (!(*r[0].invariant == *r[1].invariant)) {
        problems.push_back(tag + " different invariant");
      }
    }
  }
  std::ostringstream d;
  d << egns_solved << " of " << runs << " egns runs solved, each matched by cegns iteration 1";
  for (const auto& p : problems) d << "; " << p;
  return problems.empty() && egns_solved > 0 ? pass(d.str()) : fail(d.str());
}

Check oracle_agreement() {
  if (!external_solver_available()) return {Outcome::Skip, "no external solver installed"};
  SolverConfig ext;
  ext.backend = Backend::External;
  auto z3 = make_oracle(ext);
  SolverConfig exhaustive;
  exhaustive.brute_force_limit = 24;
  auto bf = make_oracle(exhaustive);
  const std::array<std::pair<std::size_t, unsigned>, 7> shapes{
      {{1, 4}, {1, 8}, {1, 12}, {2, 4}, {2, 6}, {3, 4}, {2, 5}}};
  std::size_t verified = 0;
  std::vector<std::string> problems;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto [n, w] = shapes[i % shapes.size()];
    const InvariantSpec spec = random_spec(derive_seed(99, {i}), n, w);
    ExprGen gen(derive_seed(98, {i}), n);
    Program cand(gen.boolean(2), n);
    if (i % 4 == 1) cand = spec.post;
    if (i % 4 == 2) cand = Program(spec.init.expr() || spec.post.expr(), n);
    if (i % 4 == 3) cand = Program(spec.init.expr() && spec.post.expr(), n);
    const VerifyResult a = verify_invariant(spec, cand, *bf);
    const VerifyResult b = verify_invariant(spec, cand, *z3);
    for (const VerifyResult* r : {&a, &b}) {
      if (r->cex) g_cex.push_back({spec, cand, *r->cex});
    }
    verified += a.status == VerifyStatus::Verified;
    if (a.status != b.status || a.status == VerifyStatus::Unknown ||
        (a.cex && b.cex && a.cex->kind != b.cex->kind)) {
      problems.push_back("pair " + std::to_string(i) + ": " + a.reason + " / " + b.reason);
    }
  }
  std::ostringstream d;
  d << "100 pairs agree (" << verified << " verified, " << 100 - verified << " refuted)";
  for (const auto& p : problems) d << "; " << p;
  return problems.empty() ? pass(d.str()) : fail(d.str());
}

// Independent of the library's condition instantiation: evaluates the raw
// predicates on the reported states.
Check counterexample_soundness() {
  std::size_t bad = 0;
  std::array<std::size_t, 3> by_kind{};
  for (const SeenCex& s : g_cex) {
    const unsigned w = s.spec.width;
    const auto& x = s.cex.state;
    const bool px = eval(s.candidate, x, w);
    bool genuine = false;
    switch (s.cex.kind) {
      case ConditionKind::Initiation:
        genuine = eval(s.spec.init, x, w) && !px;
        break;
      case ConditionKind::Safety:
        genuine = px && !eval(s.spec.post, x, w);
        break;
      case ConditionKind::Inductiveness: {
        if (!s.cex.successor) break;
        InputAssignment pair = x;
        pair.insert(pair.end(), s.cex.successor->begin(), s.cex.successor->end());
        genuine = px && eval(s.spec.trans, pair, w) && !eval(s.candidate, *s.cex.successor, w);
        break;
      }
    }
    genuine = genuine && s.cex.candidate_output == px;
    bad += !genuine;
    ++by_kind[static_cast<std::size_t>(s.cex.kind)];
  }
  std::ostringstream d;
  d << g_cex.size() - bad << "/" << g_cex.size() << " genuine (initiation " << by_kind[0]
    << ", inductiveness " << by_kind[1] << ", safety " << by_kind[2] << ")";
  return bad == 0 && !g_cex.empty() ? pass(d.str()) : fail(d.str());
}

Check labeling_faithfulness() {
  constexpr unsigned w = 4;
  auto oracle = brute();
  std::size_t specs = 0, mismatches = 0, labels = 0;
  for (std::uint64_t seed = 0; specs < 20; ++seed) {
    const InvariantSpec spec = random_spec(derive_seed(7, {seed}), 1, w);
    bool feasible = true;
    for (std::uint32_t x = 0; x < 16; ++x) {
      feasible = feasible && !(eval(spec.init, {&x, 1}, w) && !eval(spec.post, {&x, 1}, w));
    }
    if (!feasible) continue;
    ++specs;
    for (std::uint32_t x = 0; x < 16; ++x) {
      const bool i = eval(spec.init, {&x, 1}, w);
      const bool a = eval(spec.post, {&x, 1}, w);
      bool successors_ok = true;
      for (std::uint32_t y = 0; y < 16; ++y) {
        const std::array<std::uint32_t, 2> pair{x, y};
        if (eval(spec.trans, pair, w) && !eval(spec.post, {&y, 1}, w)) successors_ok = false;
      }
      const LabelInfo info = solve_output_labels(spec, std::vector<std::uint32_t>{x});
      mismatches += (info.label == Label::KnownTrue) != (i && a);
      mismatches += (info.label == Label::KnownFalse) != !a;
      for (auto h : {LabelHeuristic::DefinitiveOnly, LabelHeuristic::OverApproximate,
                     LabelHeuristic::UnderApproximate, LabelHeuristic::CombinedRandom}) {
        const auto ex = label(spec, {x}, h, seed, *oracle);
        ++labels;
        if (i && a) {
          mismatches += !(ex && ex->output);
        } else if (!a) {
          mismatches += !(ex && !ex->output);
        } else if (h == LabelHeuristic::DefinitiveOnly) {
          mismatches += ex.has_value();
        } else if (h == LabelHeuristic::OverApproximate) {
          mismatches += successors_ok ? !(ex && ex->output) : ex.has_value();
        } else if (h == LabelHeuristic::UnderApproximate) {
          mismatches += !(ex && !ex->output);
        } else {
          mismatches += !ex.has_value();
        }
      }
    }
  }

  const InvariantSpec infeasible = text_spec({"x"}, 4, "(= x #x3)", "(= x! x)", "(bvult x #x2)");
  std::vector<std::string> modes;
  for (Mode m : {Mode::Egns, Mode::Cegns}) {
    EngineConfig cfg;
    cfg.mode = m;
    auto synth = enum_for(infeasible);
    auto o = brute();
    const RunResult r = run_engine(infeasible, cfg, synth, *o);
    if (r.status != RunStatus::NoInvariant) modes.push_back(std::string(mode_name(m)));
  }
  std::ostringstream d;
  d << specs << " specs, " << labels << " labels, " << mismatches << " mismatches";
  if (!modes.empty()) d << "; infeasible spec not reported by " << modes.front();
  else d << "; infeasible spec gives no_invariant";
  return mismatches == 0 && modes.empty() ? pass(d.str()) : fail(d.str());
}

Check pruning_preservation() {
  constexpr unsigned w = 8;
  auto oracle = bitblast();
  GenConstraints c;
  c.width = w;
  std::size_t programs = 0, changed = 0, differing = 0;
  for (std::uint64_t seed = 0; programs < 1000; ++seed) {
    const Program p = gen_program(derive_seed(31, {seed}), c);
    if (p.expr().count(Op::Ite) == 0) continue;
    ++programs;
    const Program q = prune_ite(p, *oracle, w).program;
    if (q == p) continue;
    ++changed;
    const Expr differ = !(p.expr() && q.expr()) && (p.expr() || q.expr());
    differing += find_model(differ, p.param_count(), w).has_value();
  }
  const Program example = parse_program_text(
      "<s> ( bveq ( ite ( bveq v2 v2 ) v0 v1 ) #5 ) </s>", 3);
  const Program expected = parse_program_text("<s> ( bveq v0 #5 ) </s>", 3);
  const bool example_ok = prune_ite(example, *oracle, 32).program == expected;
  std::ostringstream d;
  d << programs << " programs with ite, " << changed << " pruned, " << differing
    << " not equivalent at width 8; ite(v2 = v2, v0, v1) -> v0 " << (example_ok ? "reproduced" : "NOT reproduced");
  return differing == 0 && example_ok && changed > 0 ? pass(d.str()) : fail(d.str());
}

Check corpus_hygiene() {
  const Corpus& c = desk_corpus();
  std::size_t constant = 0, bad_shift = 0;
  for (const CorpusRecord& r : c.records) {
    constant += constant_at(r.program, 8);
    const Expr& e = r.program.expr();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const Node& n = e.node(i);
      if (is_shift(n.op) && e.node(n.kids[1]).op == Op::Const && e.node(n.kids[1]).imm >= 8) {
        ++bad_shift;
      }
    }
  }
  const CorpusStats& s = c.stats;
  const bool conserved = s.discarded + s.emitted == s.generated && s.generated == 10000 &&
                         s.emitted == c.records.size();
  std::ostringstream d;
  d << s.summary() << "; " << constant << " constant, " << bad_shift << " wide constant shifts";
  return constant == 0 && bad_shift == 0 && conserved ? pass(d.str()) : fail(d.str());
}

Check branch_coverage() {
  constexpr unsigned w = 8;
  const Corpus& c = desk_corpus();
  std::size_t programs = 0, feasible = 0, infeasible = 0, missed = 0;
  for (const CorpusRecord& r : c.records) {
    const Expr& e = r.program.expr();
    const std::size_t ites = e.count(Op::Ite);
    if (ites == 0 || ites > 2) continue;
    ++programs;
    std::set<std::pair<std::uint32_t, bool>> covered;
    for (const auto& ex : r.examples) {
      for (const auto& b : covered_branches(r.program, ex.inputs, w)) covered.insert(b);
    }
    for (std::uint32_t i = 0; i < e.size(); ++i) {
      if (e.node(i).op != Op::Ite) continue;
      const Expr guard = path_condition(e, i);
      const Expr cond = e.subtree(e.node(i).kids[0]);
      for (bool then : {true, false}) {
        if (covered.contains({i, then})) {
          ++feasible;
          continue;
        }
        if (find_model(guard && (then ? cond : !cond), r.program.param_count(), w)) {
          ++feasible;
          ++missed;
        } else {
          ++infeasible;
        }
      }
    }
  }
  std::ostringstream d;
  d << programs << " programs, " << feasible - missed << "/" << feasible
    << " feasible directions covered, " << infeasible << " infeasible";
  return missed == 0 && programs > 0 ? pass(d.str()) : fail(d.str());
}

Check determinism() {
  const fs::path tmp = fs::temp_directory_path() / ("invsynth_accept_" + std::to_string(getpid()));
  fs::create_directories(tmp);
  const std::string cli = quote(INVSYNTH_CLI);
  const std::string bench = quote(testing_support::source_path("benchmarks/micro/s1.sl")) + " " +
                            quote(testing_support::source_path("benchmarks/micro/even.sl")) + " " +
                            quote(testing_support::source_path("benchmarks/micro/triple.sl"));
  std::vector<std::string> problems;
  struct Job {
    std::string name;
    std::string args;
    std::string file;
  };
  const std::vector<Job> jobs{
      {"run enum", "run --seed 3 --timeout 120 --transcript {} " + bench, "transcript"},
      {"run grammar", "run --synth grammar --seed 4 --max-iterations 30 --timeout 120 "
                      "--transcript {} " + bench, "transcript"},
      {"run egns", "run --mode egns --seed 5 --timeout 120 --transcript {} " + bench,
       "transcript"},
      {"traingen", "traingen --count 2000 --seed 9 --width 8 --out {}", "corpus"},
      {"traingen sharded", "traingen --count 2000 --seed 9 --width 8 --shards 3 --out {}",
       "corpus"},
  };
  std::string reference_corpus;
  for (const Job& job : jobs) {
    std::array<std::string, 2> outputs;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = tmp / (job.file + std::to_string(k));
      std::string args = job.args;
      args.replace(args.find("{}"), 2, quote(out.string()));
      const Shell s = shell(cli + " " + args);
      if (s.status != 0 && s.status != 1) problems.push_back(job.name + " exit " + std::to_string(s.status));
      outputs[k] = read_file(out);
    }
    if (outputs[0].empty()) problems.push_back(job.name + " produced nothing");
    if (outputs[0] != outputs[1]) problems.push_back(job.name + " differs between runs");
    if (job.file == "corpus") {
      if (reference_corpus.empty()) reference_corpus = outputs[0];
      else if (reference_corpus != outputs[0]) problems.push_back("shard count changes corpus");
    }
  }
  fs::remove_all(tmp);
  std::ostringstream d;
  d << jobs.size() << " commands run twice, outputs byte-identical";
  for (const auto& p : problems) d << "; " << p;
  return problems.empty() ? pass(d.str()) : fail(d.str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  // Counterexample soundness reads what the earlier criteria collected.
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"micro_suite_end_to_end", micro_suite_end_to_end},
      {"egns_contained_in_cegns", egns_contained_in_cegns},
      {"oracle_agreement", oracle_agreement},
      {"labeling_faithfulness", labeling_faithfulness},
      {"counterexample_soundness", counterexample_soundness},
      {"pruning_preservation", pruning_preservation},
      {"corpus_hygiene", corpus_hygiene},
      {"branch_coverage", branch_coverage},
      {"determinism", determinism},
  };
  bool failed = false;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && !only.contains(name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Check v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    failed = failed || v.outcome == Outcome::Fail;
    std::printf("%s %s: %s [%.1f s]\n", tag, name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
