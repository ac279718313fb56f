#include "invsynth/traingen.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>
#include <unordered_set>

#include "json.hpp"

#include "invsynth/error.hpp"
#include "invsynth/rng.hpp"
#include "invsynth/spec.hpp"
#include "invsynth/tokens.hpp"

namespace invsynth {

namespace {

constexpr std::uint64_t kProgramSalt = 0x50524F47;
constexpr std::uint64_t kOracleSalt = 0x4F52434C;
constexpr std::uint64_t kExampleSalt = 0x45584D50;
constexpr int kNodeRetries = 16;

bool is_leaf(Op op) { return op == Op::Var || op == Op::Const; }

// has_var[i]: the subtree rooted at node i mentions a variable.
std::vector<bool> var_flags(const Expr& e) {
  std::vector<bool> has(e.size(), false);
  for (std::size_t i = e.size(); i-- > 0;) {
    const Node& n = e.node(i);
    if (n.op == Op::Var) {
      has[i] = true;
      continue;
    }
    for (std::size_t k = 0; k < n.arity; ++k) has[i] = has[i] || has[n.kids[k]];
  }
  return has;
}

std::vector<bool> ite_flags(const Expr& e) {
  std::vector<bool> has(e.size(), false);
  for (std::size_t i = e.size(); i-- > 0;) {
    const Node& n = e.node(i);
    has[i] = n.op == Op::Ite;
    for (std::size_t k = 0; k < n.arity; ++k) has[i] = has[i] || has[n.kids[k]];
  }
  return has;
}

Expr rebuild(const Expr& e, std::uint32_t i, const std::map<std::uint32_t, Expr>& repl) {
  if (auto it = repl.find(i); it != repl.end()) return it->second;
  const Node& n = e.node(i);
  if (n.op == Op::Var) return Expr::var(n.imm);
  if (n.op == Op::Const) return Expr::constant(n.imm);
  std::vector<Expr> kids;
  for (std::size_t k = 0; k < n.arity; ++k) kids.push_back(rebuild(e, n.kids[k], repl));
  return Expr::make(n.op, kids);
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

class Generator {
 public:
  Generator(Rng& rng, const GenConstraints& c, std::size_t params)
      : rng_(rng), c_(c), params_(params) {
    consts_ = {0, 1};
    for (std::size_t i = 0; i < c.max_arbitrary_consts; ++i) {
      consts_.push_back(static_cast<std::uint32_t>(rng_()) & width_mask(c.width));
    }
  }

  std::optional<Expr> boolean(std::size_t k) {
    std::vector<Op> ops;
    for (int o = static_cast<int>(Op::BvEq); o <= static_cast<int>(Op::BvSge); ++o) {
      ops.push_back(static_cast<Op>(o));
    }
    if (k >= 2) ops.push_back(Op::Not);
    if (k >= 3) ops.insert(ops.end(), {Op::And, Op::Or});
    if (k >= 4) ops.push_back(Op::Ite);
    for (int attempt = 0; attempt < kNodeRetries; ++attempt) {
      const auto op = pick(ops);
      if (!op) return std::nullopt;
      std::optional<Expr> e;
      if (is_comparison(*op)) {
        e = binary(*op, k - 1);
      } else if (*op == Op::Not) {
        if (auto a = boolean(k - 1)) e = !*a;
      } else if (*op == Op::Ite) {
        const auto parts = split(k - 1, 3, 1);
        auto a = boolean(parts[0]);
        auto b = a ? boolean(parts[1]) : std::nullopt;
        auto d = b ? boolean(parts[2]) : std::nullopt;
        if (d) e = Expr::make(Op::Ite, *a, *b, *d);
      } else {
        const auto parts = split(k - 1, 2, 1);
        auto a = boolean(parts[0]);
        auto b = a ? boolean(parts[1]) : std::nullopt;
        if (b) e = Expr::make(*op, *a, *b);
      }
      if (e) return e;
    }
    return std::nullopt;
  }

  std::optional<Expr> bitvec(std::size_t k) {
    if (k == 0) return leaf();
    std::vector<Op> ops;
    for (int o = static_cast<int>(Op::BvNot); o <= static_cast<int>(Op::BvAshr); ++o) {
      ops.push_back(static_cast<Op>(o));
    }
    if (k >= 2) ops.push_back(Op::Ite);
    for (int attempt = 0; attempt < kNodeRetries; ++attempt) {
      const auto op = pick(ops);
      if (!op) return std::nullopt;
      std::optional<Expr> e;
      if (is_bv_unary(*op)) {
        auto a = bitvec(k - 1);
        if (a && a->op() != Op::Const) e = Expr::make(*op, *a);
      } else if (*op == Op::Ite) {
        const std::size_t cond = 1 + uniform_below(rng_, k - 1);
        const auto parts = split(k - 1 - cond, 2, 0);
        auto a = boolean(cond);
        auto b = a ? bitvec(parts[0]) : std::nullopt;
        auto d = b ? bitvec(parts[1]) : std::nullopt;
        if (d && !(b->op() == Op::Const && d->op() == Op::Const)) {
          e = Expr::make(Op::Ite, *a, *b, *d);
        }
      } else {
        e = binary(*op, k - 1);
      }
      if (e) return e;
    }
    return std::nullopt;
  }

 private:
  std::optional<Expr> binary(Op op, std::size_t k) {
    const auto parts = split(k, 2, 0);
    auto a = bitvec(parts[0]);
    auto b = a ? bitvec(parts[1]) : std::nullopt;
    if (!b) return std::nullopt;
    if (a->op() == Op::Const && b->op() == Op::Const) return std::nullopt;
    if (a->var_bound() == 0 && b->var_bound() == 0) return std::nullopt;
    if (is_shift(op) && b->op() == Op::Const && b->root().imm >= c_.width) return std::nullopt;
    return Expr::make(op, *a, *b);
  }

  Expr leaf() {
    const double wv = c_.weights[static_cast<std::size_t>(Op::Var)];
    const double wc = c_.weights[static_cast<std::size_t>(Op::Const)];
    const bool var = wv + wc <= 0 || uniform_unit(rng_) * (wv + wc) < wv;
    if (var) return Expr::var(static_cast<std::uint32_t>(uniform_below(rng_, params_)));
    return Expr::constant(consts_[uniform_below(rng_, consts_.size())]);
  }

  std::optional<Op> pick(const std::vector<Op>& ops) {
    double total = 0;
    for (Op op : ops) total += c_.weights[static_cast<std::size_t>(op)];
    if (total <= 0) return std::nullopt;
    double r = uniform_unit(rng_) * total;
    for (Op op : ops) {
      r -= c_.weights[static_cast<std::size_t>(op)];
      if (r < 0) return op;
    }
    return ops.back();
  }

  // `total` operators over `parts` children, each getting at least `min`.
  std::vector<std::size_t> split(std::size_t total, std::size_t parts, std::size_t min) {
    std::vector<std::size_t> out(parts, min);
    for (std::size_t left = total - parts * min; left > 0; --left) {
      ++out[uniform_below(rng_, parts)];
    }
    return out;
  }

  Rng& rng_;
  const GenConstraints& c_;
  std::size_t params_;
  std::vector<std::uint32_t> consts_;
};

}  // namespace

void GenConstraints::validate() const {
  if (max_ops == 0 || max_params == 0 || max_tokens == 0) {
    throw Error(Errc::InvalidArgument, "generation bounds must be positive");
  }
  if (max_params > kVariableTokens) {
    throw Error(Errc::InvalidArgument,
                "at most " + std::to_string(kVariableTokens) + " parameters are representable");
  }
  if (width < kMinWidth || width > kMaxWidth) {
    throw Error(Errc::InvalidArgument, "width must be in 2..32");
  }
}

std::size_t op_count(const Expr& e) {
  std::size_t n = 0;
  for (const Node& node : e.nodes()) n += !is_leaf(node.op);
  return n;
}

bool follows_rules(const Program& p, const GenConstraints& c) {
  const Expr& e = p.expr();
  if (op_count(e) > c.max_ops || p.param_count() > c.max_params) return false;
  if (!is_token_representable(e) || token_length(e) > c.max_tokens) return false;
  const std::vector<bool> has_var = var_flags(e);
  std::set<std::uint32_t> arbitrary;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Node& n = e.node(i);
    if (n.op == Op::Const) {
      if (n.imm > 1) arbitrary.insert(n.imm);
      continue;
    }
    if (!has_var[i]) return false;
    if (is_shift(n.op) && e.node(n.kids[1]).op == Op::Const && e.node(n.kids[1]).imm >= c.width) {
      return false;
    }
  }
  return arbitrary.size() <= c.max_arbitrary_consts;
}

Program gen_program(std::uint64_t seed, const GenConstraints& c) {
  c.validate();
  Rng rng(seed);
  const std::size_t params = 1 + uniform_below(rng, c.max_params);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const std::size_t ops = 1 + uniform_below(rng, c.max_ops);
    Generator g(rng, c, params);
    std::optional<Expr> e = g.boolean(ops);
    if (!e) continue;
    Program p(std::move(*e), params);
    if (follows_rules(p, c)) return p;
  }
  throw Error(Errc::RetryExhausted, "no program satisfies the generation constraints");
}

PruneResult prune_ite(const Program& p, Oracle& oracle, unsigned width) {
  Expr e = p.expr();
  bool flagged = false;
  for (;;) {
    const std::vector<bool> has_ite = ite_flags(e);
    std::map<std::uint32_t, Expr> repl;
    for (std::uint32_t i = 0; i < e.size(); ++i) {
      const Node& n = e.node(i);
      if (n.op != Op::Ite) continue;
      if (has_ite[n.kids[0]] || has_ite[n.kids[1]] || has_ite[n.kids[2]]) continue;
      const Expr cond = e.subtree(n.kids[0]);
      const SatResult yes = oracle.check_sat(cond, p.param_count(), width);
      if (yes.verdict == Verdict::Unsat) {
        repl.emplace(i, e.subtree(n.kids[2]));
        continue;
      }
      const SatResult no = oracle.check_sat(!cond, p.param_count(), width);
      if (no.verdict == Verdict::Unsat) {
        repl.emplace(i, e.subtree(n.kids[1]));
        continue;
      }
      flagged = flagged || yes.verdict == Verdict::Unknown || no.verdict == Verdict::Unknown;
    }
    if (repl.empty()) break;
    e = rebuild(e, 0, repl);
  }
  return {Program(std::move(e), p.param_count()), flagged};
}

std::optional<bool> is_trivial(const Program& p, Oracle& oracle, unsigned width) {
  const SatResult yes = oracle.check_sat(p.expr(), p.param_count(), width);
  if (yes.verdict == Verdict::Unsat) return true;
  const SatResult no = oracle.check_sat(!p.expr(), p.param_count(), width);
  if (no.verdict == Verdict::Unsat) return true;
  if (yes.verdict == Verdict::Unknown || no.verdict == Verdict::Unknown) return std::nullopt;
  return false;
}

std::vector<std::pair<std::uint32_t, bool>> covered_branches(const Program& p,
                                                             const InputAssignment& x,
                                                             unsigned width) {
  std::vector<std::pair<std::uint32_t, bool>> out;
  for (const BranchDecision& d : eval_trace(p, x, width).second) {
    out.emplace_back(d.node, d.branch == Branch::Then);
  }
  return out;
}

std::vector<IOExample> gen_informative_examples(const Program& p, std::size_t count,
                                                std::uint64_t seed, Oracle& oracle,
                                                unsigned width) {
  if (count == 0) throw Error(Errc::InvalidArgument, "count must be positive");
  using Target = std::pair<std::uint32_t, bool>;
  const Expr& e = p.expr();
  const std::size_t n = p.param_count();
  Rng rng(seed);

  std::set<InputAssignment> seen;
  std::vector<InputAssignment> random;
  for (std::size_t draws = 0; random.size() < count && draws < 64 * count; ++draws) {
    InputAssignment x(n);
    for (auto& v : x) v = static_cast<std::uint32_t>(rng()) & width_mask(width);
    if (seen.insert(x).second) random.push_back(std::move(x));
  }

  std::set<Target> covered;
  for (const auto& x : random) {
    for (const Target& t : covered_branches(p, x, width)) covered.insert(t);
  }
  std::vector<InputAssignment> forced;
  for (std::uint32_t i = 0; i < e.size(); ++i) {
    if (e.node(i).op != Op::Ite) continue;
    const Expr guard = path_condition(e, i);
    const Expr cond = e.subtree(e.node(i).kids[0]);
    for (bool then : {true, false}) {
      if (covered.contains({i, then})) continue;
      const SatResult r = oracle.check_sat(guard && (then ? cond : !cond), n, width);
      if (r.verdict != Verdict::Sat) continue;
      InputAssignment x(r.model.begin(), r.model.begin() + static_cast<std::ptrdiff_t>(n));
      for (const Target& t : covered_branches(p, x, width)) covered.insert(t);
      if (seen.insert(x).second) forced.push_back(std::move(x));
    }
  }

  // Greedy cover, forced inputs first, then the random ones in order.
  std::vector<InputAssignment> pool = forced;
  pool.insert(pool.end(), random.begin(), random.end());
  std::vector<bool> taken(pool.size(), false);
  std::vector<std::set<Target>> cover(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    for (const Target& t : covered_branches(p, pool[j], width)) cover[j].insert(t);
  }
  std::set<Target> open = covered;
  std::vector<std::size_t> order;
  while (!open.empty() && order.size() < count) {
    std::size_t best = pool.size();
    std::size_t gain = 0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (taken[j]) continue;
      std::size_t g = 0;
      for (const Target& t : cover[j]) g += open.contains(t);
      if (g > gain) {
        gain = g;
        best = j;
      }
    }
    if (best == pool.size()) break;
    taken[best] = true;
    order.push_back(best);
    for (const Target& t : cover[best]) open.erase(t);
  }
  for (std::size_t j = forced.size(); j < pool.size() && order.size() < count; ++j) {
    if (!taken[j]) order.push_back(j);
  }

  std::vector<IOExample> out;
  for (std::size_t j : order) out.push_back({pool[j], eval(p, pool[j], width)});
  return out;
}

std::string corpus_line(const CorpusRecord& r) {
  nlohmann::ordered_json j;
  j["tokens"] = tokens_to_strings(print_tokens(r.program));
  j["param_count"] = r.program.param_count();
  auto examples = nlohmann::ordered_json::array();
  for (const IOExample& ex : r.examples) {
    auto in = nlohmann::ordered_json::array();
    for (std::uint32_t v : ex.inputs) in.push_back(hex32(v));
    examples.push_back({{"in", in}, {"out", ex.output}});
  }
  j["examples"] = examples;
  return j.dump();
}

std::string CorpusStats::summary() const {
  return "generated=" + std::to_string(generated) + " discarded=" + std::to_string(discarded) +
         " emitted=" + std::to_string(emitted) + " trivial=" + std::to_string(trivial) +
         " duplicates=" + std::to_string(duplicates) + " invalid=" + std::to_string(invalid) +
         " flagged=" + std::to_string(flagged);
}

CorpusStats gen_corpus(const CorpusConfig& cfg, std::ostream& out) {
  cfg.constraints.validate();
  if (cfg.count == 0) throw Error(Errc::InvalidArgument, "count must be positive");
  if (cfg.examples == 0) throw Error(Errc::InvalidArgument, "examples must be positive");
  const unsigned width = cfg.constraints.width;

  enum class Outcome { Kept, Trivial, Invalid };
  struct Slot {
    Outcome outcome = Outcome::Invalid;
    std::optional<CorpusRecord> record;
  };
  std::vector<Slot> slots(cfg.count);
  const std::size_t shards = std::clamp<std::size_t>(cfg.shards, 1, cfg.count);

  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&](std::size_t shard) {
    try {
      SolverConfig sc = cfg.solver;
      sc.random_phase = true;
      auto oracle = make_oracle(sc);
      for (std::size_t i = shard; i < cfg.count; i += shards) {
        const Program raw = gen_program(derive_seed(cfg.seed, {kProgramSalt, i}), cfg.constraints);
        oracle->set_seed(derive_seed(cfg.seed, {kOracleSalt, i}));
        PruneResult pruned = prune_ite(raw, *oracle, width);
        Slot& slot = slots[i];
        if (!follows_rules(pruned.program, cfg.constraints)) continue;
        const std::optional<bool> trivial = is_trivial(pruned.program, *oracle, width);
        if (trivial.value_or(false)) {
          slot.outcome = Outcome::Trivial;
          continue;
        }
        CorpusRecord rec{pruned.program, {}, pruned.flagged || !trivial.has_value()};
        rec.examples = gen_informative_examples(rec.program, cfg.examples,
                                                derive_seed(cfg.seed, {kExampleSalt, i}),
                                                *oracle, width);
        slot.outcome = Outcome::Kept;
        slot.record = std::move(rec);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (shards == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t s = 0; s < shards; ++s) threads.emplace_back(work, s);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  CorpusStats stats;
  std::unordered_set<std::string> seen;
  for (Slot& slot : slots) {
    ++stats.generated;
    if (slot.outcome == Outcome::Invalid) {
      ++stats.invalid;
      ++stats.discarded;
      continue;
    }
    if (slot.outcome == Outcome::Trivial) {
      ++stats.trivial;
      ++stats.discarded;
      continue;
    }
    if (!seen.insert(program_text(slot.record->program)).second) {
      ++stats.duplicates;
      ++stats.discarded;
      continue;
    }
    out << corpus_line(*slot.record) << '\n';
    if (!out) throw Error(Errc::IoError, "failed to write corpus record");
    ++stats.emitted;
    stats.flagged += slot.record->flagged;
  }
  return stats;
}

}  // namespace invsynth
