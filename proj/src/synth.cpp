#include "invsynth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_set>

#include "json.hpp"

#include "invsynth/error.hpp"
#include "invsynth/rng.hpp"

namespace invsynth {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::uint32_t> constant_pool(const std::vector<std::uint32_t>& extra, unsigned width) {
  std::set<std::uint32_t> pool;
  for (std::uint32_t c = 0; c < 16; ++c) pool.insert(c & width_mask(width));
  for (std::uint32_t c : extra) pool.insert(c & width_mask(width));
  return {pool.begin(), pool.end()};
}

bool expired(const std::optional<Clock::time_point>& deadline) {
  return deadline && Clock::now() >= *deadline;
}

// ---------------------------------------------------------------------------
// Bottom-up enumeration.
//
// Terms live in two banks (bit-vector and Boolean). A term is stored only if
// its values on the examples differ from every stored term of its sort, so
// later sizes combine one representative per behaviour. Each bank keeps its
// terms sorted in the candidate order, and generation walks operators and
// operands in that order, so every size is produced already sorted.

struct Term {
  Op op = Op::Var;
  std::uint8_t arity = 0;
  std::uint16_t size = 1;
  std::uint16_t tokens = 1;
  std::uint32_t imm = 0;
  std::array<std::uint32_t, 3> kids{};
};

class Bank {
 public:
  explicit Bank(std::size_t m)
      : m_(m), seen_(1024, SigHash{this}, SigEq{this}) {}

  std::size_t size() const { return terms_.size(); }
  const Term& term(std::uint32_t i) const { return terms_[i]; }
  const std::uint32_t* sig(std::uint32_t i) const { return sigs_.data() + std::size_t{i} * m_; }
  std::uint32_t rank(std::uint32_t i) const { return rank_[i]; }
  const std::vector<std::uint32_t>& sorted() const { return sorted_; }
  const std::vector<std::uint32_t>& of_size(std::size_t s) const {
    static const std::vector<std::uint32_t> none;
    return s < by_size_.size() ? by_size_[s] : none;
  }

  // Stores `t` with signature `values` unless the behaviour is already
  // known. Returns false on a duplicate.
  bool add(const Term& t, const std::uint32_t* values) {
    const std::uint32_t id = static_cast<std::uint32_t>(terms_.size());
    sigs_.insert(sigs_.end(), values, values + m_);
    if (!seen_.insert(id).second) {
      sigs_.resize(sigs_.size() - m_);
      return false;
    }
    terms_.push_back(t);
    rank_.push_back(0);
    if (by_size_.size() <= t.size) by_size_.resize(t.size + 1);
    pending_.push_back(id);
    return true;
  }

  bool known(const std::uint32_t* values) {
    const std::uint32_t probe = static_cast<std::uint32_t>(terms_.size());
    sigs_.insert(sigs_.end(), values, values + m_);
    const bool found = seen_.contains(probe);
    sigs_.resize(sigs_.size() - m_);
    return found;
  }

  // Folds the terms added since the last call (already in order among
  // themselves) into the global order.
  template <class Less>
  void commit(Less less) {
    for (std::uint32_t id : pending_) by_size_[terms_[id].size].push_back(id);
    std::vector<std::uint32_t> merged;
    merged.reserve(sorted_.size() + pending_.size());
    std::merge(sorted_.begin(), sorted_.end(), pending_.begin(), pending_.end(),
               std::back_inserter(merged), less);
    sorted_ = std::move(merged);
    for (std::uint32_t r = 0; r < sorted_.size(); ++r) rank_[sorted_[r]] = r;
    pending_.clear();
  }

 private:
  struct SigHash {
    const Bank* bank;
    std::size_t operator()(std::uint32_t id) const {
      const std::uint32_t* s = bank->sigs_.data() + std::size_t{id} * bank->m_;
      std::uint64_t h = 0x9E3779B97F4A7C15ULL;
      for (std::size_t i = 0; i < bank->m_; ++i) h = mix64(h ^ s[i]);
      return static_cast<std::size_t>(h);
    }
  };
  struct SigEq {
    const Bank* bank;
    bool operator()(std::uint32_t a, std::uint32_t b) const {
      const std::uint32_t* base = bank->sigs_.data();
      return std::equal(base + std::size_t{a} * bank->m_, base + std::size_t{a + 1} * bank->m_,
                        base + std::size_t{b} * bank->m_);
    }
  };

  std::size_t m_;
  std::vector<Term> terms_;
  std::vector<std::uint32_t> sigs_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::vector<std::uint32_t>> by_size_;
  std::vector<std::uint32_t> sorted_;
  std::vector<std::uint32_t> pending_;
  std::unordered_set<std::uint32_t, SigHash, SigEq> seen_;
};

std::uint16_t nibble_count(std::uint32_t v) {
  std::uint16_t n = 0;
  do {
    ++n;
    v >>= 4;
  } while (v != 0);
  return n;
}

void combine(Op op, const std::uint32_t* a, const std::uint32_t* b, const std::uint32_t* c,
             std::uint32_t* out, std::size_t m, unsigned width) {
  const std::uint32_t mask = width_mask(width);
  const std::uint32_t sign = std::uint32_t{1} << (width - 1);
  switch (op) {
    case Op::BvAdd:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] + b[i]) & mask;
      return;
    case Op::BvSub:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] - b[i]) & mask;
      return;
    case Op::BvAnd:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] & b[i];
      return;
    case Op::BvOr:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] | b[i];
      return;
    case Op::BvXor:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] ^ b[i];
      return;
    case Op::BvEq:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] == b[i];
      return;
    case Op::BvUlt:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] < b[i];
      return;
    case Op::BvUle:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] <= b[i];
      return;
    case Op::BvUgt:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] > b[i];
      return;
    case Op::BvUge:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] >= b[i];
      return;
    // Flipping the sign bit turns signed order into unsigned order.
    case Op::BvSlt:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] ^ sign) < (b[i] ^ sign);
      return;
    case Op::BvSle:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] ^ sign) <= (b[i] ^ sign);
      return;
    case Op::BvSgt:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] ^ sign) > (b[i] ^ sign);
      return;
    case Op::BvSge:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] ^ sign) >= (b[i] ^ sign);
      return;
    case Op::BvMul:
      for (std::size_t i = 0; i < m; ++i) out[i] = (a[i] * b[i]) & mask;
      return;
    case Op::BvShl:
      for (std::size_t i = 0; i < m; ++i) out[i] = b[i] >= width ? 0u : (a[i] << b[i]) & mask;
      return;
    case Op::BvLshr:
      for (std::size_t i = 0; i < m; ++i) out[i] = b[i] >= width ? 0u : a[i] >> b[i];
      return;
    case Op::BvNot:
      for (std::size_t i = 0; i < m; ++i) out[i] = ~a[i] & mask;
      return;
    case Op::BvNeg:
      for (std::size_t i = 0; i < m; ++i) out[i] = (0u - a[i]) & mask;
      return;
    case Op::And:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] & b[i];
      return;
    case Op::Or:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] | b[i];
      return;
    case Op::Not:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] ^ 1u;
      return;
    case Op::Ite:
      for (std::size_t i = 0; i < m; ++i) out[i] = a[i] ? b[i] : c[i];
      return;
    default:
      for (std::size_t i = 0; i < m; ++i) {
        out[i] = apply_op(op, a[i], b ? b[i] : 0, c ? c[i] : 0, width);
      }
  }
}

class Enumerator {
 public:
  Enumerator(const SynthesisRequest& req, const EnumOptions& opts)
      : req_(req),
        opts_(opts),
        m_(req.examples.size()),
        bv_(m_),
        bool_(m_),
        target_(m_),
        scratch_(m_) {
    for (std::size_t i = 0; i < m_; ++i) target_[i] = req.examples[i].output ? 1 : 0;
  }

  CandidateSet run() {
    seed_leaves();
    for (std::size_t s = 2; s <= opts_.max_size; ++s) {
      if (grow(s)) break;
      if (full_) break;
    }
    if (out_.candidates.empty()) {
      throw Error(Errc::Timeout, "enumeration budget exhausted without a consistent program");
    }
    return std::move(out_);
  }

 private:
  struct Stop {};

  void seed_leaves() {
    std::vector<std::uint32_t> vals(m_);
    for (std::uint32_t v = 0; v < req_.param_count; ++v) {
      for (std::size_t i = 0; i < m_; ++i) vals[i] = req_.examples[i].inputs[v] & width_mask(req_.width);
      Term t;
      t.op = Op::Var;
      t.imm = v;
      bv_.add(t, vals.data());
    }
    for (std::uint32_t c : constant_pool(opts_.constants, req_.width)) {
      std::fill(vals.begin(), vals.end(), c);
      Term t;
      t.op = Op::Const;
      t.imm = c;
      t.tokens = nibble_count(c);
      bv_.add(t, vals.data());
    }
    bv_.commit(bv_less());
  }

  // Returns true once the beam is full.
  bool grow(std::size_t s) {
    try {
      grow_bv(s);
      grow_bool(s);
    } catch (Stop) {
      return true;
    }
    bv_.commit(bv_less());
    bool_.commit(bool_less());
    return false;
  }

  void grow_bv(std::size_t s) {
    for (Op op : {Op::BvNot, Op::BvNeg}) {
      for (std::uint32_t a : bv_.of_size(s - 1)) {
        if (bv_.term(a).op == Op::Const) continue;
        emit_bv(op, {a}, s);
      }
    }
    for (int o = static_cast<int>(Op::BvAdd); o <= static_cast<int>(Op::BvAshr); ++o) {
      const Op op = static_cast<Op>(o);
      const bool comm = op_info(op).commutative;
      for (std::uint32_t a : bv_.sorted()) {
        const std::size_t sa = bv_.term(a).size;
        if (sa + 1 >= s) continue;
        for (std::uint32_t b : bv_.of_size(s - 1 - sa)) {
          if (!operands_ok(op, bv_.term(a), bv_.term(b))) continue;
          if (comm && bv_.rank(b) < bv_.rank(a)) continue;
          emit_bv(op, {a, b}, s);
        }
      }
    }
    for (std::uint32_t c : bool_.sorted()) {
      const std::size_t sc = bool_.term(c).size;
      if (sc + 3 > s) continue;
      for (std::uint32_t t : bv_.sorted()) {
        const std::size_t st = bv_.term(t).size;
        if (sc + st + 2 > s) continue;
        for (std::uint32_t e : bv_.of_size(s - 1 - sc - st)) {
          if (bv_.term(t).op == Op::Const && bv_.term(e).op == Op::Const) continue;
          emit_bv(Op::Ite, {c, t, e}, s);
        }
      }
    }
  }

  void grow_bool(std::size_t s) {
    for (int o = static_cast<int>(Op::BvEq); o <= static_cast<int>(Op::BvSge); ++o) {
      const Op op = static_cast<Op>(o);
      const bool comm = op_info(op).commutative;
      for (std::uint32_t a : bv_.sorted()) {
        const std::size_t sa = bv_.term(a).size;
        if (sa + 1 >= s) continue;
        for (std::uint32_t b : bv_.of_size(s - 1 - sa)) {
          if (!operands_ok(op, bv_.term(a), bv_.term(b))) continue;
          if (comm && bv_.rank(b) < bv_.rank(a)) continue;
          emit_bool(op, {a, b}, s);
        }
      }
    }
    for (Op op : {Op::And, Op::Or}) {
      for (std::uint32_t a : bool_.sorted()) {
        const std::size_t sa = bool_.term(a).size;
        if (sa + 1 >= s) continue;
        for (std::uint32_t b : bool_.of_size(s - 1 - sa)) {
          if (bool_.rank(b) < bool_.rank(a)) continue;
          emit_bool(op, {a, b}, s);
        }
      }
    }
    for (std::uint32_t a : bool_.of_size(s - 1)) emit_bool(Op::Not, {a}, s);
    for (std::uint32_t c : bool_.sorted()) {
      const std::size_t sc = bool_.term(c).size;
      if (sc + 3 > s) continue;
      for (std::uint32_t t : bool_.sorted()) {
        const std::size_t st = bool_.term(t).size;
        if (sc + st + 2 > s) continue;
        for (std::uint32_t e : bool_.of_size(s - 1 - sc - st)) {
          emit_bool(Op::Ite, {c, t, e}, s);
        }
      }
    }
  }

  bool operands_ok(Op op, const Term& a, const Term& b) const {
    if (a.op == Op::Const && b.op == Op::Const) return false;
    if (is_shift(op) && b.op == Op::Const && b.imm >= req_.width) return false;
    return true;
  }

  Term make_term(Op op, std::initializer_list<std::uint32_t> kids, std::size_t s,
                 const Bank& operands, const Bank* cond) {
    Term t;
    t.op = op;
    t.arity = static_cast<std::uint8_t>(kids.size());
    t.size = static_cast<std::uint16_t>(s);
    t.tokens = 3;
    std::size_t k = 0;
    for (std::uint32_t id : kids) {
      t.kids[k] = id;
      const Bank& b = (k == 0 && cond) ? *cond : operands;
      t.tokens = static_cast<std::uint16_t>(t.tokens + b.term(id).tokens);
      ++k;
    }
    return t;
  }

  const std::uint32_t* evaluate(Op op, const Term& t, const Bank& operands, const Bank* cond) {
    if (op == Op::Ite) {
      const std::uint32_t* c = cond->sig(t.kids[0]);
      const std::uint32_t* a = operands.sig(t.kids[1]);
      const std::uint32_t* b = operands.sig(t.kids[2]);
      for (std::size_t i = 0; i < m_; ++i) scratch_[i] = c[i] ? a[i] : b[i];
    } else {
      combine(op, operands.sig(t.kids[0]), t.arity > 1 ? operands.sig(t.kids[1]) : nullptr,
              nullptr, scratch_.data(), m_, req_.width);
    }
    return scratch_.data();
  }

  void tick() {
    if ((++ticks_ & 0x3FF) == 0 && expired(req_.deadline)) {
      throw Error(Errc::Timeout, "enumeration deadline reached");
    }
  }

  void emit_bv(Op op, std::initializer_list<std::uint32_t> kids, std::size_t s) {
    tick();
    if (full_) return;
    const Bank* cond = op == Op::Ite ? &bool_ : nullptr;
    const Term t = make_term(op, kids, s, bv_, cond);
    const std::uint32_t* vals = evaluate(op, t, bv_, cond);
    if (bv_.known(vals)) return;
    if (bv_.size() + bool_.size() >= opts_.max_bank) {
      full_ = true;
      return;
    }
    bv_.add(t, vals);
  }

  void emit_bool(Op op, std::initializer_list<std::uint32_t> kids, std::size_t s) {
    tick();
    const bool compare = is_comparison(op);
    const Bank& operands = compare ? bv_ : bool_;
    const Bank* cond = op == Op::Ite ? &bool_ : nullptr;
    const Term t = make_term(op, kids, s, operands, cond);
    const std::uint32_t* vals = evaluate(op, t, operands, cond);
    if (std::equal(vals, vals + m_, target_.begin()) && t.tokens + 2u <= req_.max_tokens) {
      out_.candidates.push_back(
          {Program(build_bool_root(t), req_.param_count), 1.0 / (1.0 + static_cast<double>(s))});
      if (out_.candidates.size() >= req_.beam) throw Stop{};
    }
    if (full_ || bool_.known(vals)) return;
    if (bv_.size() + bool_.size() >= opts_.max_bank) {
      full_ = true;
      return;
    }
    bool_.add(t, vals);
  }

  Expr build_bool_root(const Term& t) const {
    std::vector<Expr> kids;
    for (std::size_t k = 0; k < t.arity; ++k) {
      if (is_comparison(t.op)) {
        kids.push_back(build_bv(t.kids[k]));
      } else {
        kids.push_back(build_bool(t.kids[k]));
      }
    }
    return Expr::make(t.op, kids);
  }

  Expr build_bool(std::uint32_t id) const { return build_bool_root(bool_.term(id)); }

  Expr build_bv(std::uint32_t id) const {
    const Term& t = bv_.term(id);
    if (t.op == Op::Var) return Expr::var(t.imm);
    if (t.op == Op::Const) return Expr::constant(t.imm);
    std::vector<Expr> kids;
    for (std::size_t k = 0; k < t.arity; ++k) {
      kids.push_back(t.op == Op::Ite && k == 0 ? build_bool(t.kids[k]) : build_bv(t.kids[k]));
    }
    return Expr::make(t.op, kids);
  }

  // Candidate order: compound terms first (their opening parenthesis sorts
  // before any leaf token), then variables by index, then constants by
  // value; compound terms by operator, then operands left to right.
  static int leaf_class(const Term& t) { return t.op == Op::Var ? 1 : t.op == Op::Const ? 2 : 0; }

  template <bool Boolean>
  bool less(std::uint32_t x, std::uint32_t y) const {
    const Bank& bank = Boolean ? bool_ : bv_;
    const Term& a = bank.term(x);
    const Term& b = bank.term(y);
    const int ca = leaf_class(a);
    const int cb = leaf_class(b);
    if (ca != cb) return ca < cb;
    if (ca != 0) return a.imm < b.imm;
    if (a.op != b.op) return a.op < b.op;
    for (std::size_t k = 0; k < a.arity; ++k) {
      const Bank& kb = operand_bank<Boolean>(a.op, k);
      if (a.kids[k] != b.kids[k]) return kb.rank(a.kids[k]) < kb.rank(b.kids[k]);
    }
    return false;
  }

  template <bool Boolean>
  const Bank& operand_bank(Op op, std::size_t k) const {
    if (op == Op::Ite && k == 0) return bool_;
    if (op == Op::Ite) return Boolean ? bool_ : bv_;
    if (is_comparison(op)) return bv_;
    return Boolean ? bool_ : bv_;
  }

  struct Less {
    const Enumerator* self;
    bool boolean;
    bool operator()(std::uint32_t x, std::uint32_t y) const {
      return boolean ? self->less<true>(x, y) : self->less<false>(x, y);
    }
  };
  Less bv_less() const { return {this, false}; }
  Less bool_less() const { return {this, true}; }

  const SynthesisRequest& req_;
  const EnumOptions& opts_;
  std::size_t m_;
  Bank bv_;
  Bank bool_;
  std::vector<std::uint32_t> target_;
  std::vector<std::uint32_t> scratch_;
  CandidateSet out_;
  bool full_ = false;
  std::uint64_t ticks_ = 0;
};

// ---------------------------------------------------------------------------
// Weighted grammar sampling.

class Sampler {
 public:
  Sampler(const SynthesisRequest& req, const GrammarOptions& opts, Rng& rng)
      : req_(req), opts_(opts), rng_(rng), pool_(constant_pool(opts.constants, req.width)) {}

  // nullopt when the draw breaks a syntactic rule.
  std::optional<Expr> boolean(int depth) {
    std::vector<Op> choices;
    for (int o = static_cast<int>(Op::BvEq); o <= static_cast<int>(Op::BvSge); ++o) {
      choices.push_back(static_cast<Op>(o));
    }
    if (depth < opts_.max_depth) {
      for (Op op : {Op::And, Op::Or, Op::Not, Op::Ite}) choices.push_back(op);
    }
    const Op op = pick(choices);
    if (is_comparison(op)) {
      auto a = bitvec(depth + 1);
      auto b = bitvec(depth + 1);
      if (!a || !b) return std::nullopt;
      if (a->op() == Op::Const && b->op() == Op::Const) return std::nullopt;
      return Expr::make(op, *a, *b);
    }
    std::vector<Expr> kids;
    for (std::size_t k = 0; k < op_info(op).arity; ++k) {
      auto e = boolean(depth + 1);
      if (!e) return std::nullopt;
      kids.push_back(std::move(*e));
    }
    return Expr::make(op, kids);
  }

  std::optional<Expr> bitvec(int depth) {
    std::vector<Op> choices{Op::Var, Op::Const};
    if (depth < opts_.max_depth) {
      for (int o = static_cast<int>(Op::BvNot); o <= static_cast<int>(Op::BvAshr); ++o) {
        choices.push_back(static_cast<Op>(o));
      }
      choices.push_back(Op::Ite);
    }
    const Op op = pick(choices);
    if (op == Op::Var) {
      logp_ -= std::log(static_cast<double>(req_.param_count));
      return Expr::var(static_cast<std::uint32_t>(uniform_below(rng_, req_.param_count)));
    }
    if (op == Op::Const) {
      logp_ -= std::log(static_cast<double>(pool_.size()));
      return Expr::constant(pool_[uniform_below(rng_, pool_.size())]);
    }
    if (op == Op::Ite) {
      auto c = boolean(depth + 1);
      auto t = bitvec(depth + 1);
      auto e = bitvec(depth + 1);
      if (!c || !t || !e) return std::nullopt;
      if (t->op() == Op::Const && e->op() == Op::Const) return std::nullopt;
      return Expr::make(Op::Ite, *c, *t, *e);
    }
    std::vector<Expr> kids;
    for (std::size_t k = 0; k < op_info(op).arity; ++k) {
      auto e = bitvec(depth + 1);
      if (!e) return std::nullopt;
      kids.push_back(std::move(*e));
    }
    if (kids.size() == 1 && kids[0].op() == Op::Const) return std::nullopt;
    if (kids.size() == 2) {
      if (kids[0].op() == Op::Const && kids[1].op() == Op::Const) return std::nullopt;
      if (is_shift(op) && kids[1].op() == Op::Const && kids[1].root().imm >= req_.width) {
        return std::nullopt;
      }
    }
    return Expr::make(op, kids);
  }

  double take_logp() {
    const double v = logp_;
    logp_ = 0.0;
    return v;
  }

 private:
  Op pick(const std::vector<Op>& choices) {
    double total = 0.0;
    for (Op op : choices) total += opts_.weights[static_cast<std::size_t>(op)];
    if (total <= 0.0) throw Error(Errc::InvalidArgument, "grammar weights leave no production");
    double r = uniform_unit(rng_) * total;
    Op chosen = choices.back();
    for (Op op : choices) {
      const double w = opts_.weights[static_cast<std::size_t>(op)];
      if (w <= 0.0) continue;
      chosen = op;
      if (r < w) break;
      r -= w;
    }
    logp_ += std::log(opts_.weights[static_cast<std::size_t>(chosen)] / total);
    return chosen;
  }

  const SynthesisRequest& req_;
  const GrammarOptions& opts_;
  Rng& rng_;
  std::vector<std::uint32_t> pool_;
  double logp_ = 0.0;
};

std::string hex_word(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

}  // namespace

CandidateSet Synthesizer::synthesize(const SynthesisRequest& req) {
  if (req.beam == 0) throw Error(Errc::InvalidArgument, "beam must be at least 1");
  if (req.param_count == 0 || req.param_count > kVariableTokens) {
    throw Error(Errc::InvalidArgument,
                "param_count must be in 1.." + std::to_string(kVariableTokens));
  }
  for (const IOExample& ex : req.examples) {
    if (ex.inputs.size() != req.param_count) {
      throw Error(Errc::InvalidArgument, "example arity differs from param_count");
    }
  }
  CandidateSet out = run(req);
  if (out.candidates.size() > req.beam) {
    out.candidates.erase(out.candidates.begin() + static_cast<std::ptrdiff_t>(req.beam),
                         out.candidates.end());
  }
  return out;
}

bool satisfies_all(const Program& p, const std::vector<IOExample>& examples, unsigned width) {
  Evaluator ev(p.expr(), width);
  return std::all_of(examples.begin(), examples.end(), [&](const IOExample& ex) {
    return (ev(ex.inputs) != 0) == ex.output;
  });
}

std::size_t count_satisfied(const Program& p, const std::vector<IOExample>& examples,
                            unsigned width) {
  Evaluator ev(p.expr(), width);
  return static_cast<std::size_t>(std::count_if(
      examples.begin(), examples.end(),
      [&](const IOExample& ex) { return (ev(ex.inputs) != 0) == ex.output; }));
}

CandidateSet enum_synthesize(const SynthesisRequest& req, const EnumOptions& opts) {
  return Enumerator(req, opts).run();
}

GrammarWeights uniform_weights() {
  GrammarWeights w{};
  w.fill(1.0);
  return w;
}

CandidateSet grammar_beam_synthesize(const SynthesisRequest& req, const GrammarOptions& opts) {
  const std::size_t pool_size = 16 * std::max<std::size_t>(req.beam, 100);
  Rng rng(derive_seed(req.seed, {0x4752414D}));
  Sampler sampler(req, opts, rng);

  struct Entry {
    Program program;
    std::string text;
    std::size_t satisfied;
    double logp;
  };
  std::vector<Entry> pool;
  std::unordered_set<std::string> seen;
  for (std::size_t draws = 0; pool.size() < pool_size && draws < 20 * pool_size; ++draws) {
    if ((draws & 0xFF) == 0 && expired(req.deadline)) break;
    std::optional<Expr> e = sampler.boolean(0);
    const double logp = sampler.take_logp();
    if (!e || token_length(*e) > req.max_tokens) continue;
    Program p(std::move(*e), req.param_count);
    std::string text = program_text(p);
    if (!seen.insert(text).second) continue;
    const std::size_t sat = count_satisfied(p, req.examples, req.width);
    pool.push_back({std::move(p), std::move(text), sat, logp});
  }
  if (pool.empty()) throw Error(Errc::EmptyBeam, "grammar sampler produced no program");

  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    if (a.satisfied != b.satisfied) return a.satisfied > b.satisfied;
    if (a.logp != b.logp) return a.logp > b.logp;
    return a.text < b.text;
  });
  CandidateSet out;
  const double m = static_cast<double>(req.examples.size());
  for (std::size_t i = 0; i < std::min(req.beam, pool.size()); ++i) {
    const double score = m == 0 ? 1.0 : static_cast<double>(pool[i].satisfied) / m;
    out.candidates.push_back({std::move(pool[i].program), score});
  }
  return out;
}

std::string encode_request(const SynthesisRequest& req) {
  nlohmann::ordered_json j;
  j["beam"] = req.beam;
  j["param_count"] = req.param_count;
  nlohmann::ordered_json examples = nlohmann::ordered_json::array();
  for (const IOExample& ex : req.examples) {
    nlohmann::ordered_json in = nlohmann::ordered_json::array();
    for (std::uint32_t v : ex.inputs) in.push_back(hex_word(v));
    examples.push_back({{"in", std::move(in)}, {"out", ex.output}});
  }
  j["examples"] = std::move(examples);
  return j.dump();
}

CandidateSet decode_response(const std::string& line, const SynthesisRequest& req) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BackendFailure, std::string("malformed response: ") + e.what());
  }
  if (j.is_object() && j.contains("error")) {
    throw Error(Errc::BackendFailure, "synthesizer error: " + j["error"].dump());
  }
  if (!j.is_object() || !j.contains("candidates") || !j["candidates"].is_array()) {
    throw Error(Errc::BackendFailure, "response lacks a candidates array");
  }
  CandidateSet out;
  for (const auto& c : j["candidates"]) {
    if (!c.is_object() || !c.contains("tokens") || !c["tokens"].is_array()) {
      ++out.dropped;
      continue;
    }
    try {
      std::vector<Token> tokens;
      for (const auto& t : c["tokens"]) {
        if (!t.is_string()) throw Error(Errc::UnknownToken, "non-string token");
        tokens.push_back(Token::from_text(t.get<std::string>()));
      }
      if (tokens.size() > req.max_tokens) {
        ++out.dropped;
        continue;
      }
      Program p = parse_tokens(tokens, req.param_count);
      const double score = c.contains("score") && c["score"].is_number() ? c["score"].get<double>() : 0.0;
      out.candidates.push_back({std::move(p), score});
    } catch (const Error&) {
      ++out.dropped;
    }
  }
  if (out.candidates.empty()) {
    throw Error(Errc::EmptyBeam, "no parseable candidate among " +
                                     std::to_string(j["candidates"].size()));
  }
  return out;
}

CandidateSet ExternalSynthesizer::run(const SynthesisRequest& req) {
  if (!proc_) proc_ = std::make_unique<Process>(command_);
  const auto deadline = req.deadline.value_or(Clock::now() + std::chrono::seconds(600));
  auto discard = [&](const std::string& why) -> Error {
    proc_->kill();
    proc_.reset();
    return Error(Errc::BackendFailure, why);
  };
  if (!proc_->write(encode_request(req) + "\n")) {
    proc_->close_input();
    const int status = proc_->wait();
    proc_.reset();
    throw Error(Errc::BackendFailure,
                "synthesizer '" + command_ + "' exited with status " + std::to_string(status));
  }
  std::string line;
  switch (proc_->read_line(line, deadline)) {
    case Process::Status::Ok:
      break;
    case Process::Status::Timeout:
      proc_->kill();
      proc_.reset();
      throw Error(Errc::Timeout, "synthesizer did not answer before the deadline");
    case Process::Status::Closed: {
      proc_->close_input();
      const int status = proc_->wait();
      proc_.reset();
      throw Error(Errc::BackendFailure,
                  "synthesizer '" + command_ + "' exited with status " + std::to_string(status));
    }
  }
  try {
    return decode_response(line, req);
  } catch (const Error& e) {
    if (e.code() == Errc::EmptyBeam) throw;
    throw discard(e.what());
  }
}

}  // namespace invsynth
