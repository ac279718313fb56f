#include "invsynth/spec.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "invsynth/error.hpp"
#include "invsynth/smtlib.hpp"
#include "invsynth/tokens.hpp"

namespace invsynth {

namespace {

struct FunctionDef {
  std::vector<std::string> params;
  std::vector<Sort> param_sorts;
  Sort result = Sort::Bool;
  SExpr body;
  SourceLoc loc;
};

using FunctionTable = std::map<std::string, FunctionDef, std::less<>>;

[[noreturn]] void syntax_error(const SExpr& at, const std::string& what) {
  throw Error(Errc::SyntaxError, at.loc.str() + ": " + what);
}

// Parses a sort; Bool yields nullopt, (_ BitVec w) yields w.
std::optional<unsigned> parse_sort(const SExpr& s) {
  if (s.is_atom("Bool")) return std::nullopt;
  if (s.is_list && s.items.size() == 3 && s.items[0].is_atom("_") &&
      s.items[1].is_atom("BitVec") && s.items[2].is_atom()) {
    unsigned long w = 0;
    try {
      w = std::stoul(s.items[2].atom);
    } catch (const std::exception&) {
      syntax_error(s, "bad bit-vector width '" + s.items[2].atom + "'");
    }
    if (w < kMinWidth || w > kMaxWidth) {
      throw Error(Errc::UnsupportedConstruct,
                  s.loc.str() + ": (_ BitVec " + std::to_string(w) +
                      ") outside supported widths 2..32");
    }
    return static_cast<unsigned>(w);
  }
  throw Error(Errc::UnsupportedConstruct, s.loc.str() + ": sort " + s.str());
}

std::optional<std::uint64_t> parse_bv_literal(const std::string& atom, unsigned& bits) {
  if (atom.size() > 2 && atom[0] == '#' && (atom[1] == 'x' || atom[1] == 'b')) {
    const bool hex = atom[1] == 'x';
    std::uint64_t v = 0;
    for (std::size_t i = 2; i < atom.size(); ++i) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(atom[i])));
      unsigned d = 0;
      if (c >= '0' && c <= '9') {
        d = static_cast<unsigned>(c - '0');
      } else if (hex && c >= 'a' && c <= 'f') {
        d = static_cast<unsigned>(c - 'a' + 10);
      } else {
        return std::nullopt;
      }
      if (!hex && d > 1) return std::nullopt;
      v = hex ? (v << 4) | d : (v << 1) | d;
    }
    bits = static_cast<unsigned>((atom.size() - 2) * (hex ? 4 : 1));
    return v;
  }
  return std::nullopt;
}

class Lowering {
 public:
  Lowering(const FunctionTable& functions, unsigned width)
      : functions_(functions), width_(width) {}

  Expr lower(const SExpr& t, const std::map<std::string, Expr, std::less<>>& scope,
             int depth = 0) {
    if (depth > 256) syntax_error(t, "term nesting too deep");
    if (t.is_atom()) return lower_atom(t, scope);
    if (t.items.empty()) syntax_error(t, "empty application");
    const SExpr& head = t.items.front();

    if (head.is_list) {
      // (_ bvN w)
      if (head.items.size() == 3 && head.items[0].is_atom("_")) {
        syntax_error(t, "indexed operator application " + head.str());
      }
      syntax_error(t, "unexpected list in operator position");
    }
    const std::string& name = head.atom;
    if (name == "_") return lower_indexed_constant(t);
    if (name == "let") return lower_let(t, scope, depth);

    std::vector<Expr> args;
    args.reserve(t.items.size() - 1);
    for (std::size_t i = 1; i < t.items.size(); ++i) {
      args.push_back(lower(t.items[i], scope, depth + 1));
    }

    if (auto fn = functions_.find(name); fn != functions_.end()) {
      const FunctionDef& def = fn->second;
      if (def.params.size() != args.size()) {
        throw Error(Errc::SortMismatch, t.loc.str() + ": " + name + " expects " +
                                            std::to_string(def.params.size()) + " arguments");
      }
      std::map<std::string, Expr, std::less<>> inner;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].sort() != def.param_sorts[i]) {
          throw Error(Errc::SortMismatch, t.loc.str() + ": argument " +
                                              std::to_string(i + 1) + " of " + name);
        }
        inner.insert_or_assign(def.params[i], args[i]);
      }
      return lower(def.body, inner, depth + 1);
    }
    return apply(name, args, t);
  }

 private:
  Expr lower_atom(const SExpr& t, const std::map<std::string, Expr, std::less<>>& scope) {
    if (auto it = scope.find(t.atom); it != scope.end()) return it->second;
    if (t.atom == "true") return Expr::literal(true);
    if (t.atom == "false") return Expr::literal(false);
    unsigned bits = 0;
    if (auto v = parse_bv_literal(t.atom, bits)) {
      if (bits != width_) {
        throw Error(Errc::SortMismatch, t.loc.str() + ": literal " + t.atom + " has " +
                                            std::to_string(bits) + " bits, expected " +
                                            std::to_string(width_));
      }
      return Expr::constant(static_cast<std::uint32_t>(*v));
    }
    if (!t.atom.empty() && std::isdigit(static_cast<unsigned char>(t.atom[0]))) {
      throw Error(Errc::UnsupportedConstruct, t.loc.str() + ": integer literal " + t.atom);
    }
    if (auto fn = functions_.find(t.atom); fn != functions_.end() && fn->second.params.empty()) {
      return lower(fn->second.body, {});
    }
    throw Error(Errc::SyntaxError, t.loc.str() + ": unbound symbol '" + t.atom + "'");
  }

  Expr lower_indexed_constant(const SExpr& t) {
    if (t.items.size() == 3 && t.items[1].is_atom() && t.items[1].atom.rfind("bv", 0) == 0 &&
        t.items[2].is_atom()) {
      unsigned long long value = 0;
      unsigned long w = 0;
      try {
        value = std::stoull(t.items[1].atom.substr(2));
        w = std::stoul(t.items[2].atom);
      } catch (const std::exception&) {
        syntax_error(t, "malformed indexed constant");
      }
      if (w != width_) {
        throw Error(Errc::SortMismatch, t.loc.str() + ": constant of width " +
                                            std::to_string(w) + ", expected " +
                                            std::to_string(width_));
      }
      return Expr::constant(static_cast<std::uint32_t>(value) & width_mask(width_));
    }
    throw Error(Errc::UnsupportedConstruct, t.loc.str() + ": " + t.str());
  }

  Expr lower_let(const SExpr& t, const std::map<std::string, Expr, std::less<>>& scope,
                 int depth) {
    if (t.items.size() != 3 || !t.items[1].is_list) syntax_error(t, "malformed let");
    auto inner = scope;
    // Bindings are parallel: evaluate all in the outer scope.
    std::vector<std::pair<std::string, Expr>> bound;
    for (const SExpr& b : t.items[1].items) {
      if (!b.is_list || b.items.size() != 2 || !b.items[0].is_atom()) {
        syntax_error(b, "malformed let binding");
      }
      bound.emplace_back(b.items[0].atom, lower(b.items[1], scope, depth + 1));
    }
    for (auto& [name, e] : bound) inner.insert_or_assign(name, std::move(e));
    return lower(t.items[2], inner, depth + 1);
  }

  static Expr iff(const Expr& a, const Expr& b) { return (a && b) || (!a && !b); }

  Expr fold(Op op, const std::vector<Expr>& args, const SExpr& at) {
    if (args.size() < 2) {
      throw Error(Errc::SortMismatch, at.loc.str() + ": " + std::string(op_info(op).smt) +
                                          " needs at least two operands");
    }
    Expr acc = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) acc = checked(op, {acc, args[i]}, at);
    return acc;
  }

  Expr checked(Op op, std::vector<Expr> args, const SExpr& at) {
    try {
      return Expr::make(op, args);
    } catch (const Error& e) {
      throw Error(Errc::SortMismatch, at.loc.str() + ": " + e.what());
    }
  }

  Expr apply(const std::string& name, const std::vector<Expr>& args, const SExpr& at) {
    if (name == "and" || name == "or") {
      if (args.empty()) return Expr::literal(name == "and");
      if (args.size() == 1) {
        if (args[0].sort() != Sort::Bool) throw Error(Errc::SortMismatch, at.loc.str());
        return args[0];
      }
      return fold(name == "and" ? Op::And : Op::Or, args, at);
    }
    if (name == "=>") {
      if (args.size() < 2) throw Error(Errc::SortMismatch, at.loc.str() + ": => arity");
      // right associative
      Expr acc = args.back();
      for (std::size_t i = args.size() - 1; i-- > 0;) {
        if (args[i].sort() != Sort::Bool || acc.sort() != Sort::Bool) {
          throw Error(Errc::SortMismatch, at.loc.str() + ": => on non-Boolean");
        }
        acc = implies(args[i], acc);
      }
      return acc;
    }
    if (name == "=" || name == "distinct" || name == "xor") {
      if (args.size() != 2) {
        throw Error(Errc::UnsupportedConstruct,
                    at.loc.str() + ": " + name + " with " + std::to_string(args.size()) +
                        " operands");
      }
      if (args[0].sort() != args[1].sort()) {
        throw Error(Errc::SortMismatch, at.loc.str() + ": " + name + " on mixed sorts");
      }
      Expr eq = args[0].sort() == Sort::Bool ? iff(args[0], args[1])
                                             : checked(Op::BvEq, args, at);
      if (name == "=") return eq;
      if (name == "xor" && args[0].sort() != Sort::Bool) {
        throw Error(Errc::SortMismatch, at.loc.str() + ": xor on bit-vectors");
      }
      return !eq;
    }
    for (std::size_t i = static_cast<std::size_t>(Op::BvNot); i < kOpCount; ++i) {
      const Op op = static_cast<Op>(i);
      const OpInfo& info = op_info(op);
      if (info.smt != name || op == Op::BvEq) continue;
      if (info.arity == 2 && info.commutative && args.size() > 2) return fold(op, args, at);
      if (args.size() != info.arity) {
        throw Error(Errc::SortMismatch, at.loc.str() + ": " + name + " expects " +
                                            std::to_string(info.arity) + " operands");
      }
      return checked(op, args, at);
    }
    throw Error(Errc::UnsupportedConstruct, at.loc.str() + ": function '" + name + "'");
  }

  const FunctionTable& functions_;
  unsigned width_;
};

FunctionDef parse_define_fun(const SExpr& cmd, std::optional<unsigned>& width) {
  if (cmd.items.size() != 5 || !cmd.items[1].is_atom() || !cmd.items[2].is_list) {
    syntax_error(cmd, "malformed define-fun");
  }
  FunctionDef def;
  def.loc = cmd.loc;
  for (const SExpr& p : cmd.items[2].items) {
    if (!p.is_list || p.items.size() != 2 || !p.items[0].is_atom()) {
      syntax_error(p, "malformed parameter");
    }
    const auto w = parse_sort(p.items[1]);
    if (w) {
      if (width && *width != *w) {
        throw Error(Errc::SortMismatch, p.loc.str() + ": mixed bit-vector widths");
      }
      width = w;
    }
    def.params.push_back(p.items[0].atom);
    def.param_sorts.push_back(w ? Sort::BitVec : Sort::Bool);
  }
  const auto rw = parse_sort(cmd.items[3]);
  if (rw) {
    if (width && *width != *rw) {
      throw Error(Errc::SortMismatch, cmd.loc.str() + ": mixed bit-vector widths");
    }
    width = rw;
  }
  def.result = rw ? Sort::BitVec : Sort::Bool;
  def.body = cmd.items[4];
  return def;
}

}  // namespace

std::vector<std::string> InvariantSpec::trans_names() const {
  std::vector<std::string> out = params;
  for (const std::string& p : params) out.push_back(p + "!");
  return out;
}

InvariantSpec make_spec(std::vector<std::string> params, unsigned width, Expr init, Expr trans,
                        Expr post, std::string inv_name) {
  if (params.empty()) throw Error(Errc::ArityMismatch, "spec needs at least one variable");
  if (width < kMinWidth || width > kMaxWidth) {
    throw Error(Errc::UnsupportedConstruct, "width " + std::to_string(width));
  }
  const std::size_t n = params.size();
  auto as_program = [](Expr e, std::size_t count, const char* what) {
    try {
      return Program(std::move(e), count);
    } catch (const Error& err) {
      throw Error(Errc::SortMismatch, std::string(what) + ": " + err.what());
    }
  };
  Program i = as_program(std::move(init), n, "init");
  Program t = as_program(std::move(trans), 2 * n, "trans");
  Program a = as_program(std::move(post), n, "post");
  return InvariantSpec{std::move(inv_name), std::move(params), width, std::move(i),
                       std::move(t), std::move(a)};
}

std::string_view condition_name(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::Initiation:
      return "initiation";
    case ConditionKind::Inductiveness:
      return "inductiveness";
    case ConditionKind::Safety:
      return "safety";
  }
  return "?";
}

std::array<VerificationCondition, 3> instantiate_conditions(const InvariantSpec& spec,
                                                            const Program& candidate) {
  const std::size_t n = spec.arity();
  if (candidate.param_count() != n) {
    throw Error(Errc::ArityMismatch, "candidate has " +
                                         std::to_string(candidate.param_count()) +
                                         " parameters, spec has " + std::to_string(n));
  }
  const Expr& p = candidate.expr();
  const Expr p_next = shift_vars(p, static_cast<std::uint32_t>(n));
  return {{
      {ConditionKind::Initiation, spec.init.expr(), p, n},
      {ConditionKind::Inductiveness, p && spec.trans.expr(), p_next, 2 * n},
      {ConditionKind::Safety, p, spec.post.expr(), n},
  }};
}

bool condition_holds(const InvariantSpec& spec, const Program& candidate, ConditionKind kind,
                     std::span<const std::uint32_t> state,
                     std::span<const std::uint32_t> successor) {
  const unsigned w = spec.width;
  switch (kind) {
    case ConditionKind::Initiation:
      return !eval(spec.init, state, w) || eval(candidate, state, w);
    case ConditionKind::Safety:
      return !eval(candidate, state, w) || eval(spec.post, state, w);
    case ConditionKind::Inductiveness: {
      std::vector<std::uint32_t> both(state.begin(), state.end());
      both.insert(both.end(), successor.begin(), successor.end());
      return !(eval(candidate, state, w) && eval(spec.trans, both, w)) ||
             eval(candidate, successor, w);
    }
  }
  return false;
}

InvariantSpec parse_benchmark(std::string_view text) {
  const std::vector<SExpr> commands = parse_sexprs(text);
  FunctionTable functions;
  std::optional<unsigned> width;
  std::optional<SExpr> synth_inv;
  std::optional<SExpr> constraint;
  bool check_synth = false;
  bool logic_set = false;

  for (const SExpr& cmd : commands) {
    const std::string_view head = cmd.head();
    if (head.empty()) syntax_error(cmd, "expected a command");
    if (head == "set-logic") {
      if (cmd.items.size() != 2 || !cmd.items[1].is_atom()) syntax_error(cmd, "set-logic");
      const std::string& logic = cmd.items[1].atom;
      if (logic != "BV" && logic != "QF_BV") {
        throw Error(Errc::UnsupportedConstruct, cmd.loc.str() + ": logic " + logic);
      }
      logic_set = true;
    } else if (head == "set-info" || head == "set-option") {
      continue;
    } else if (head == "synth-inv") {
      if (cmd.items.size() == 4) {
        throw Error(Errc::UnsupportedConstruct, cmd.loc.str() + ": synth-inv grammars");
      }
      if (cmd.items.size() != 3 || !cmd.items[1].is_atom() || !cmd.items[2].is_list) {
        syntax_error(cmd, "malformed synth-inv");
      }
      for (const SExpr& p : cmd.items[2].items) {
        if (!p.is_list || p.items.size() != 2 || !p.items[0].is_atom()) {
          syntax_error(p, "malformed parameter");
        }
        const auto w = parse_sort(p.items[1]);
        if (!w) throw Error(Errc::SortMismatch, p.loc.str() + ": Boolean state variable");
        if (width && *width != *w) {
          throw Error(Errc::SortMismatch, p.loc.str() + ": mixed bit-vector widths");
        }
        width = w;
      }
      if (cmd.items[2].items.empty()) syntax_error(cmd, "synth-inv without variables");
      synth_inv = cmd;
    } else if (head == "declare-primed-var" || head == "declare-var") {
      if (cmd.items.size() != 3) syntax_error(cmd, std::string(head));
      const auto w = parse_sort(cmd.items[2]);
      if (w && width && *width != *w) {
        throw Error(Errc::SortMismatch, cmd.loc.str() + ": mixed bit-vector widths");
      }
    } else if (head == "define-fun") {
      FunctionDef def = parse_define_fun(cmd, width);
      functions.insert_or_assign(cmd.items[1].atom, std::move(def));
    } else if (head == "inv-constraint") {
      if (cmd.items.size() != 5) syntax_error(cmd, "inv-constraint needs four names");
      for (std::size_t i = 1; i < 5; ++i) {
        if (!cmd.items[i].is_atom()) syntax_error(cmd.items[i], "expected a symbol");
      }
      constraint = cmd;
    } else if (head == "check-synth") {
      check_synth = true;
    } else {
      throw Error(Errc::UnsupportedConstruct, cmd.loc.str() + ": command " + std::string(head));
    }
  }

  if (!logic_set) throw Error(Errc::SyntaxError, "missing set-logic");
  if (!synth_inv) throw Error(Errc::SyntaxError, "missing synth-inv");
  if (!constraint) throw Error(Errc::SyntaxError, "missing inv-constraint");
  if (!check_synth) throw Error(Errc::SyntaxError, "missing check-synth");

  const std::string inv_name = synth_inv->items[1].atom;
  std::vector<std::string> params;
  for (const SExpr& p : synth_inv->items[2].items) params.push_back(p.items[0].atom);
  const std::size_t n = params.size();

  if (constraint->items[1].atom != inv_name) {
    throw Error(Errc::SyntaxError,
                constraint->loc.str() + ": inv-constraint names unknown invariant '" +
                    constraint->items[1].atom + "'");
  }

  Lowering lowering(functions, *width);
  auto lower_fn = [&](const SExpr& ref, std::size_t expected) {
    auto it = functions.find(ref.atom);
    if (it == functions.end()) {
      throw Error(Errc::SyntaxError, ref.loc.str() + ": undefined function '" + ref.atom + "'");
    }
    const FunctionDef& def = it->second;
    if (def.params.size() != expected || def.result != Sort::Bool) {
      throw Error(Errc::SortMismatch, def.loc.str() + ": " + ref.atom + " must take " +
                                          std::to_string(expected) +
                                          " bit-vectors and return Bool");
    }
    std::map<std::string, Expr, std::less<>> scope;
    for (std::size_t i = 0; i < def.params.size(); ++i) {
      if (def.param_sorts[i] != Sort::BitVec) {
        throw Error(Errc::SortMismatch, def.loc.str() + ": Boolean parameter in " + ref.atom);
      }
      scope.insert_or_assign(def.params[i], Expr::var(static_cast<std::uint32_t>(i)));
    }
    Expr body = lowering.lower(def.body, scope);
    if (body.sort() != Sort::Bool) {
      throw Error(Errc::SortMismatch, def.loc.str() + ": body of " + ref.atom + " is not Bool");
    }
    return body;
  };

  Expr init = lower_fn(constraint->items[2], n);
  Expr trans = lower_fn(constraint->items[3], 2 * n);
  Expr post = lower_fn(constraint->items[4], n);
  return make_spec(std::move(params), *width, std::move(init), std::move(trans), std::move(post),
                   inv_name);
}

InvariantSpec load_benchmark(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_benchmark(buf.str());
}

Expr lower_smt_term(const SExpr& term, std::span<const std::string> vars, unsigned width) {
  FunctionTable none;
  std::map<std::string, Expr, std::less<>> scope;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    scope.insert_or_assign(vars[i], Expr::var(static_cast<std::uint32_t>(i)));
  }
  return Lowering(none, width).lower(term, scope);
}

Program parse_invariant_text(const InvariantSpec& spec, std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error(Errc::SyntaxError, "empty invariant");
  text.remove_prefix(first);
  if (text.rfind("<s>", 0) == 0) return parse_tokens(tokenize(text), spec.arity());

  const std::vector<SExpr> items = parse_sexprs(text);
  if (items.size() != 1) throw Error(Errc::SyntaxError, "expected exactly one term");
  const SExpr& t = items.front();
  if (t.head() == "define-fun") {
    std::optional<unsigned> width = spec.width;
    FunctionDef def = parse_define_fun(t, width);
    if (def.params.size() != spec.arity() || def.result != Sort::Bool) {
      throw Error(Errc::SortMismatch, "invariant signature does not match the benchmark");
    }
    Expr body = lower_smt_term(def.body, def.params, spec.width);
    return Program(std::move(body), spec.arity());
  }
  Expr body = lower_smt_term(t, spec.params, spec.width);
  if (body.sort() != Sort::Bool) throw Error(Errc::SortMismatch, "invariant is not Boolean");
  return Program(std::move(body), spec.arity());
}

std::string invariant_define_fun(const InvariantSpec& spec, const Program& invariant) {
  std::string out = "(define-fun " + spec.inv_name + " (";
  for (std::size_t i = 0; i < spec.params.size(); ++i) {
    if (i > 0) out += ' ';
    out += "(" + spec.params[i] + " " + smt_sort(spec.width) + ")";
  }
  out += ") Bool " + to_smtlib(invariant, spec.params, spec.width) + ")";
  return out;
}

std::vector<std::uint32_t> spec_constants(const InvariantSpec& spec) {
  std::set<std::uint32_t> seen;
  for (const Program* p : {&spec.init, &spec.trans, &spec.post}) {
    for (const Node& n : p->expr().nodes()) {
      if (n.op == Op::Const) seen.insert(n.imm & width_mask(spec.width));
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace invsynth
