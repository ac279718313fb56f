#include "invsynth/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "invsynth/bitblast.hpp"
#include "invsynth/error.hpp"
#include "invsynth/process.hpp"
#include "invsynth/rng.hpp"
#include "invsynth/sat.hpp"
#include "invsynth/sexpr.hpp"
#include "invsynth/smtlib.hpp"

namespace invsynth {

namespace {

using Clock = std::chrono::steady_clock;

void collect_conjuncts(const Expr& e, std::size_t i, std::vector<std::size_t>& out) {
  const Node& n = e.node(i);
  if (n.op == Op::And) {
    collect_conjuncts(e, n.kids[0], out);
    collect_conjuncts(e, n.kids[1], out);
  } else {
    out.push_back(i);
  }
}

void collect_vars(const Expr& e, std::size_t i, std::set<std::uint32_t>& out) {
  const Node& n = e.node(i);
  if (n.op == Op::Var) out.insert(n.imm);
  for (std::size_t k = 0; k < n.arity; ++k) collect_vars(e, n.kids[k], out);
}

struct EnumerationPlan {
  std::vector<std::uint32_t> enumerated;
  // Evaluated in order; each definition only reads enumerated variables and
  // variables defined earlier in this list.
  std::vector<std::pair<std::uint32_t, Expr>> definitions;
};

EnumerationPlan plan_enumeration(const Expr& formula) {
  std::set<std::uint32_t> used;
  collect_vars(formula, 0, used);
  std::vector<std::size_t> conjuncts;
  collect_conjuncts(formula, 0, conjuncts);

  std::set<std::uint32_t> defined;
  std::vector<std::pair<std::uint32_t, Expr>> found;
  std::vector<bool> consumed(conjuncts.size(), false);
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t c = 0; c < conjuncts.size(); ++c) {
      if (consumed[c]) continue;
      const Node& n = formula.node(conjuncts[c]);
      if (n.op != Op::BvEq) continue;
      for (int side = 0; side < 2; ++side) {
        const Node& lhs = formula.node(n.kids[side]);
        if (lhs.op != Op::Var || defined.count(lhs.imm) != 0) continue;
        std::set<std::uint32_t> rhs_vars;
        collect_vars(formula, n.kids[1 - side], rhs_vars);
        bool ok = rhs_vars.count(lhs.imm) == 0;
        for (std::uint32_t v : rhs_vars) ok = ok && defined.count(v) == 0;
        if (!ok) continue;
        defined.insert(lhs.imm);
        found.emplace_back(lhs.imm, formula.subtree(n.kids[1 - side]));
        consumed[c] = true;
        progress = true;
        break;
      }
    }
  }
  EnumerationPlan plan;
  for (std::uint32_t v : used) {
    if (defined.count(v) == 0) plan.enumerated.push_back(v);
  }
  plan.definitions.assign(std::make_move_iterator(found.rbegin()),
                          std::make_move_iterator(found.rend()));
  return plan;
}

bool model_satisfies(const Expr& formula, const InputAssignment& model, unsigned width) {
  return eval_expr(formula, model, width) != 0;
}

std::uint32_t random_word(std::uint64_t& state, unsigned width) {
  state = mix64(state);
  return static_cast<std::uint32_t>(state) & width_mask(width);
}

class BruteForceOracle final : public Oracle {
 public:
  using Oracle::Oracle;

 protected:
  SatResult solve(const Expr& formula, std::size_t var_count, unsigned width,
                  std::uint64_t seed, std::chrono::milliseconds budget) override {
    std::optional<std::uint64_t> rs;
    if (config().random_phase) rs = seed;
    return brute_force_check(formula, var_count, width, config().brute_force_limit, rs,
                             Clock::now() + budget);
  }
};

class BitBlastOracle final : public Oracle {
 public:
  using Oracle::Oracle;

 protected:
  SatResult solve(const Expr& formula, std::size_t var_count, unsigned width,
                  std::uint64_t seed, std::chrono::milliseconds budget) override {
    sat::Solver solver(seed, config().random_phase);
    BitBlaster blaster(solver, width);
    const sat::Lit root = blaster.blast(formula);
    solver.add_clause({root});
    switch (solver.solve(Clock::now() + budget)) {
      case sat::Result::Unsat:
        return SatResult::unsat();
      case sat::Result::Unknown:
        return SatResult::unknown("timeout");
      case sat::Result::Sat:
        break;
    }
    std::uint64_t filler = seed;
    InputAssignment model(var_count, 0);
    for (std::uint32_t v = 0; v < var_count; ++v) {
      if (blaster.has_var(v)) {
        const auto& bits = blaster.var_bits(v);
        std::uint32_t value = 0;
        for (unsigned i = 0; i < width; ++i) {
          if (solver.model_value_lit(bits[i])) value |= 1u << i;
        }
        model[v] = value;
      } else if (config().random_phase) {
        model[v] = random_word(filler, width);
      }
    }
    return SatResult::sat(std::move(model));
  }
};

std::optional<std::uint32_t> parse_value(const SExpr& v) {
  unsigned bits = 0;
  if (v.is_atom()) {
    const std::string& a = v.atom;
    if (a.size() > 2 && a[0] == '#') {
      std::uint64_t x = 0;
      const bool hex = a[1] == 'x';
      if (!hex && a[1] != 'b') return std::nullopt;
      for (std::size_t i = 2; i < a.size(); ++i) {
        const int c = std::tolower(static_cast<unsigned char>(a[i]));
        const int d = std::isdigit(c) ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : 99;
        if (d >= (hex ? 16 : 2)) return std::nullopt;
        x = hex ? (x << 4) | static_cast<unsigned>(d) : (x << 1) | static_cast<unsigned>(d);
        bits += hex ? 4 : 1;
      }
      if (bits > 32 && (x >> 32) != 0) return std::nullopt;
      return static_cast<std::uint32_t>(x);
    }
    return std::nullopt;
  }
  if (v.items.size() == 3 && v.items[0].is_atom("_") && v.items[1].is_atom() &&
      v.items[1].atom.rfind("bv", 0) == 0) {
    try {
      return static_cast<std::uint32_t>(std::stoull(v.items[1].atom.substr(2)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

class ExternalOracle final : public Oracle {
 public:
  explicit ExternalOracle(SolverConfig cfg) : Oracle(std::move(cfg)) {
    if (config().command.empty()) {
      throw Error(Errc::InvalidArgument, "empty solver command");
    }
  }

 protected:
  SatResult solve(const Expr& formula, std::size_t var_count, unsigned width,
                  std::uint64_t seed, std::chrono::milliseconds budget) override {
    if (!proc_) start();
    const auto deadline = Clock::now() + budget;

    std::vector<std::string> names;
    for (std::size_t i = 0; i < var_count; ++i) names.push_back("v" + std::to_string(i));
    // Solvers tend to settle on the same model whatever the seed, so under
    // random_phase each variable is relabelled as v xor r for a seeded r.
    std::vector<std::uint32_t> masks(var_count, 0);
    Expr query = formula;
    if (config().random_phase) {
      Rng rng(seed);
      std::vector<Expr> relabel;
      for (std::size_t i = 0; i < var_count; ++i) {
        masks[i] = static_cast<std::uint32_t>(rng()) & width_mask(width);
        relabel.push_back(Expr::make(Op::BvXor, Expr::var(static_cast<std::uint32_t>(i)),
                                     Expr::constant(masks[i])));
      }
      query = bind_vars(formula, relabel);
    }
    const std::string term = to_smtlib(query, names, width);

    const bool blocking = config().random_phase && !options_supported_;
    std::vector<InputAssignment>* history = nullptr;
    if (blocking) history = &history_[to_smtlib(formula, names, width)];

    std::string prelude = "(reset)\n(set-option :produce-models true)\n";
    if (config().random_phase && options_supported_) {
      const std::uint32_t s = static_cast<std::uint32_t>(seed & 0x7FFFFFFF);
      prelude += "(set-option :smt.random_seed " + std::to_string(s) + ")\n";
      prelude += "(set-option :sat.random_seed " + std::to_string(s) + ")\n";
      prelude += "(set-option :sat.phase random)\n";
      prelude += "(set-option :smt.phase_selection 5)\n";
    }
    prelude += "(set-logic QF_BV)\n";
    for (const std::string& n : names) {
      prelude += "(declare-fun " + n + " () " + smt_sort(width) + ")\n";
    }
    prelude += "(assert " + term + ")\n";

    for (int attempt = 0; attempt < 2; ++attempt) {
      std::string script = prelude;
      if (history) {
        for (const InputAssignment& m : *history) {
          std::string eqs;
          for (std::size_t i = 0; i < var_count; ++i) {
            eqs += " (= " + names[i] + " " + smt_bv_literal(m[i] ^ masks[i], width) + ")";
          }
          if (!eqs.empty()) script += "(assert (not (and true" + eqs + ")))\n";
        }
      }
      script += "(check-sat)\n";
      SatResult r = run_query(script, names, width, deadline);
      if (r.verdict == Verdict::Sat) {
        for (std::size_t i = 0; i < var_count; ++i) r.model[i] ^= masks[i];
      }
      if (history && r.verdict == Verdict::Unsat && !history->empty()) {
        history->clear();
        continue;
      }
      if (history && r.verdict == Verdict::Sat) {
        history->push_back(r.model);
        if (history->size() > 64) history->erase(history->begin());
      }
      return r;
    }
    return SatResult::unknown("unreachable");
  }

 private:
  void start() {
    proc_ = std::make_unique<Process>(config().command);
    const auto deadline = Clock::now() + std::chrono::seconds(10);
    proc_->write(
        "(set-option :smt.random_seed 1)\n(set-option :sat.random_seed 1)\n"
        "(set-option :sat.phase random)\n(set-option :smt.phase_selection 5)\n"
        "(echo \"__sync__\")\n");
    bool failed = false;
    for (;;) {
      SExpr item;
      const auto st = next_item(item, deadline);
      if (st != Process::Status::Ok) {
        proc_.reset();
        throw Error(Errc::SolverProcessFailure,
                    "solver '" + config().command + "' did not respond");
      }
      if (item.is_atom("__sync__") || item.is_atom("\"__sync__\"")) break;
      if (item.head() == "error" || item.is_atom("unsupported")) failed = true;
    }
    options_supported_ = !failed;
  }

  Process::Status next_item(SExpr& out, Clock::time_point deadline) {
    for (;;) {
      std::string& buf = proc_->buffer();
      const std::size_t first = buf.find_first_not_of(" \t\r\n");
      if (first != std::string::npos) {
        const std::size_t used = read_one_sexpr(std::string_view(buf).substr(first), out);
        if (used > 0) {
          buf.erase(0, first + used);
          return Process::Status::Ok;
        }
      }
      const auto st = proc_->read_some(deadline);
      if (st != Process::Status::Ok) return st;
    }
  }

  SatResult fail(Process::Status st) {
    proc_->kill();
    proc_.reset();
    return SatResult::unknown(st == Process::Status::Timeout ? "timeout"
                                                             : "solver process exited");
  }

  SatResult run_query(const std::string& script, const std::vector<std::string>& names,
                      unsigned width, Clock::time_point deadline) {
    if (!proc_->write(script)) return fail(Process::Status::Closed);
    std::string error;
    Verdict verdict = Verdict::Unknown;
    for (;;) {
      SExpr item;
      const auto st = next_item(item, deadline);
      if (st != Process::Status::Ok) return fail(st);
      if (item.head() == "error") {
        error = item.str();
        continue;
      }
      if (item.is_atom("sat")) {
        verdict = Verdict::Sat;
      } else if (item.is_atom("unsat")) {
        verdict = Verdict::Unsat;
      } else if (item.is_atom("unknown")) {
        verdict = Verdict::Unknown;
      } else {
        continue;
      }
      break;
    }
    if (!error.empty()) return SatResult::unknown("solver error: " + error);
    if (verdict == Verdict::Unsat) return SatResult::unsat();
    if (verdict == Verdict::Unknown) return SatResult::unknown("solver returned unknown");

    InputAssignment model(names.size(), 0);
    if (names.empty()) return SatResult::sat(std::move(model));
    std::string req = "(get-value (";
    for (std::size_t i = 0; i < names.size(); ++i) req += (i ? " " : "") + names[i];
    req += "))\n";
    if (!proc_->write(req)) return fail(Process::Status::Closed);
    SExpr values;
    const auto st = next_item(values, deadline);
    if (st != Process::Status::Ok) return fail(st);
    if (values.head() == "error" || !values.is_list || values.items.size() != names.size()) {
      return SatResult::unknown("malformed model: " + values.str());
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      const SExpr& pair = values.items[i];
      if (!pair.is_list || pair.items.size() != 2) {
        return SatResult::unknown("malformed model: " + values.str());
      }
      const auto v = parse_value(pair.items[1]);
      if (!v) return SatResult::unknown("malformed value: " + pair.str());
      model[i] = *v & width_mask(width);
    }
    return SatResult::sat(std::move(model));
  }

  std::unique_ptr<Process> proc_;
  bool options_supported_ = false;
  std::map<std::string, std::vector<InputAssignment>> history_;
};

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::BruteForce:
      return "brute";
    case Backend::BitBlast:
      return "bitblast";
    case Backend::External:
      return "external";
  }
  return "?";
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Sat:
      return "sat";
    case Verdict::Unsat:
      return "unsat";
    case Verdict::Unknown:
      return "unknown";
  }
  return "?";
}

SatResult Oracle::check_sat(const Expr& formula, std::size_t var_count, unsigned width) {
  if (formula.sort() != Sort::Bool) {
    throw Error(Errc::TypeMismatch, "check_sat needs a Boolean formula");
  }
  if (formula.var_bound() > var_count) {
    throw Error(Errc::ArityMismatch, "formula references variables beyond the query");
  }
  const std::uint64_t seed =
      cfg_.random_phase ? derive_seed(cfg_.seed, {queries_}) : cfg_.seed;
  ++queries_;
  auto budget = cfg_.timeout;
  if (deadline_) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(*deadline_ - Clock::now());
    if (left.count() <= 0) return SatResult::unknown("timeout");
    budget = std::min(budget, left);
  }
  SatResult r = solve(formula, var_count, width, seed, budget);
  if (r.verdict == Verdict::Sat) {
    if (r.model.size() != var_count || !model_satisfies(formula, r.model, width)) {
      return SatResult::unknown("model failed validation");
    }
  }
  return r;
}

std::unique_ptr<Oracle> make_oracle(const SolverConfig& cfg) {
  switch (cfg.backend) {
    case Backend::BruteForce:
      return std::make_unique<BruteForceOracle>(cfg);
    case Backend::BitBlast:
      return std::make_unique<BitBlastOracle>(cfg);
    case Backend::External:
      return std::make_unique<ExternalOracle>(cfg);
  }
  throw Error(Errc::InvalidArgument, "unknown backend");
}

bool external_solver_available(const std::string& command) {
  try {
    SolverConfig cfg;
    cfg.backend = Backend::External;
    cfg.command = command;
    cfg.timeout = std::chrono::seconds(10);
    ExternalOracle oracle(cfg);
    return oracle.check_sat(Expr::literal(true), 1, 4).verdict == Verdict::Sat;
  } catch (const Error&) {
    return false;
  }
}

unsigned brute_force_bits(const Expr& formula, std::size_t, unsigned width) {
  return static_cast<unsigned>(plan_enumeration(formula).enumerated.size()) * width;
}

SatResult brute_force_check(const Expr& formula, std::size_t var_count, unsigned width,
                            unsigned limit, std::optional<std::uint64_t> random_seed,
                            std::optional<Clock::time_point> deadline) {
  const EnumerationPlan plan = plan_enumeration(formula);
  const unsigned bits = static_cast<unsigned>(plan.enumerated.size()) * width;
  if (bits > limit || bits > 40) {
    throw Error(Errc::BruteForceLimitExceeded,
                std::to_string(bits) + " state bits to enumerate, limit " +
                    std::to_string(limit));
  }
  const std::uint64_t space = std::uint64_t{1} << bits;
  const std::uint64_t mask = space - 1;
  std::uint64_t start = 0, stride = 1;
  InputAssignment values(var_count, 0);
  if (random_seed) {
    std::uint64_t s = *random_seed;
    start = mix64(s ^ 0x1) & mask;
    stride = (mix64(s ^ 0x2) | 1u) & mask;
    if (stride == 0) stride = 1;
    for (std::uint32_t& v : values) v = random_word(s, width);
  }

  std::vector<Evaluator> defs;
  defs.reserve(plan.definitions.size());
  for (const auto& d : plan.definitions) defs.emplace_back(d.second, width);
  Evaluator check(formula, width);
  const std::uint32_t wmask = width_mask(width);

  for (std::uint64_t i = 0; i < space; ++i) {
    if ((i & 0xFFFF) == 0xFFFF && deadline && Clock::now() > *deadline) {
      return SatResult::unknown("timeout");
    }
    std::uint64_t code = (start + stride * i) & mask;
    for (std::uint32_t v : plan.enumerated) {
      values[v] = static_cast<std::uint32_t>(code) & wmask;
      code = width >= 64 ? 0 : code >> width;
    }
    for (std::size_t d = 0; d < defs.size(); ++d) {
      values[plan.definitions[d].first] = defs[d](values);
    }
    if (check(values) != 0) return SatResult::sat(values);
  }
  return SatResult::unsat();
}

std::vector<InputAssignment> distinct_models(Oracle& oracle, const Expr& formula,
                                             std::size_t var_count, unsigned width,
                                             std::size_t first, std::size_t span,
                                             std::size_t count) {
  std::vector<InputAssignment> out;
  Expr query = formula;
  while (out.size() < count) {
    const SatResult r = oracle.check_sat(query, var_count, width);
    if (r.verdict != Verdict::Sat) break;
    out.push_back(r.model);
    if (span == 0) break;
    Expr same = Expr::make(Op::BvEq, Expr::var(static_cast<std::uint32_t>(first)),
                           Expr::constant(r.model[first]));
    for (std::size_t i = 1; i < span; ++i) {
      same = same && Expr::make(Op::BvEq, Expr::var(static_cast<std::uint32_t>(first + i)),
                                Expr::constant(r.model[first + i]));
    }
    query = query && !same;
  }
  return out;
}

bool is_genuine(const InvariantSpec& spec, const Program& candidate, const Counterexample& cex) {
  if (cex.state.size() != spec.arity()) return false;
  if (cex.kind == ConditionKind::Inductiveness) {
    if (!cex.successor || cex.successor->size() != spec.arity()) return false;
    return !condition_holds(spec, candidate, cex.kind, cex.state, *cex.successor);
  }
  return !condition_holds(spec, candidate, cex.kind, cex.state);
}

VerifyResult verify_invariant(const InvariantSpec& spec, const Program& candidate,
                              Oracle& oracle) {
  const auto conditions = instantiate_conditions(spec, candidate);
  const std::size_t n = spec.arity();
  for (const VerificationCondition& vc : conditions) {
    const SatResult r = oracle.check_sat(vc.violation(), vc.var_count, spec.width);
    if (r.verdict == Verdict::Unsat) continue;
    if (r.verdict == Verdict::Unknown) {
      return {VerifyStatus::Unknown, std::nullopt,
              std::string(condition_name(vc.kind)) + ": " + r.reason};
    }
    Counterexample cex;
    cex.kind = vc.kind;
    cex.state.assign(r.model.begin(), r.model.begin() + static_cast<std::ptrdiff_t>(n));
    cex.candidate_output = eval(candidate, cex.state, spec.width);
    if (vc.kind == ConditionKind::Inductiveness) {
      cex.successor = InputAssignment(r.model.begin() + static_cast<std::ptrdiff_t>(n),
                                      r.model.end());
      cex.successor_output = eval(candidate, *cex.successor, spec.width);
    }
    if (!is_genuine(spec, candidate, cex)) {
      return {VerifyStatus::Unknown, std::nullopt, "solver returned a spurious counterexample"};
    }
    return {VerifyStatus::Refuted, std::move(cex), {}};
  }
  return {VerifyStatus::Verified, std::nullopt, {}};
}

LabelInfo solve_output_labels(const InvariantSpec& spec, std::span<const std::uint32_t> x) {
  const bool init = eval(spec.init, x, spec.width);
  const bool post = eval(spec.post, x, spec.width);
  LabelInfo info;
  info.feasible = !(init && !post);
  if (!post) {
    info.label = Label::KnownFalse;
  } else if (init) {
    info.label = Label::KnownTrue;
  }
  return info;
}

std::optional<bool> successors_safe(const InvariantSpec& spec,
                                    std::span<const std::uint32_t> x, Oracle& oracle) {
  const std::size_t n = spec.arity();
  if (x.size() != n) throw Error(Errc::ArityMismatch, "state has the wrong arity");
  std::vector<Expr> binding;
  binding.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) binding.push_back(Expr::constant(x[i]));
  for (std::size_t i = 0; i < n; ++i) binding.push_back(Expr::var(static_cast<std::uint32_t>(i)));
  const Expr query = bind_vars(spec.trans.expr(), binding) && !spec.post.expr();
  const SatResult r = oracle.check_sat(query, n, spec.width);
  if (r.verdict == Verdict::Unknown) return std::nullopt;
  return r.verdict == Verdict::Unsat;
}

std::string format_assignment(std::span<const std::uint32_t> values,
                              std::span<const std::string> names) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += (i < names.size() ? names[i] : "v" + std::to_string(i)) + "=" +
           std::to_string(values[i]);
  }
  return out;
}

std::string describe(const Counterexample& cex, const InvariantSpec& spec) {
  std::string out = std::string(condition_name(cex.kind)) + " violated at " +
                    format_assignment(cex.state, spec.params);
  if (cex.successor) {
    out += " -> " + format_assignment(*cex.successor, spec.params);
  }
  return out;
}

}  // namespace invsynth
