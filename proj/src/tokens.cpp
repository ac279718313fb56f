#include "invsynth/tokens.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "invsynth/error.hpp"

namespace invsynth {

namespace {

constexpr std::size_t kFirstVariable = 4;
constexpr std::size_t kFirstNibble = kFirstVariable + kVariableTokens;
constexpr std::size_t kFirstOperator = kFirstNibble + kNibbleTokens;
constexpr std::size_t kFirstVocabOp = static_cast<std::size_t>(Op::BvNot);

static_assert(kFirstOperator + kOperatorTokens == kVocabularySize);
static_assert(kOpCount - kFirstVocabOp == kOperatorTokens);

constexpr std::string_view kHex = "0123456789ABCDEF";

void emit(const Expr& e, std::size_t i, std::vector<Token>& out) {
  const Node& n = e.node(i);
  switch (n.op) {
    case Op::Var:
      if (n.imm >= kVariableTokens) {
        throw Error(Errc::NotRepresentable,
                    "variable v" + std::to_string(n.imm) + " has no token");
      }
      out.push_back(Token::variable(n.imm));
      return;
    case Op::Const: {
      std::array<unsigned, 8> digits{};
      std::size_t count = 0;
      std::uint32_t v = n.imm;
      do {
        digits[count++] = v & 0xF;
        v >>= 4;
      } while (v != 0);
      while (count-- > 0) out.push_back(Token::nibble(digits[count]));
      return;
    }
    default:
      out.push_back(Token::open());
      out.push_back(Token::op(n.op));
      for (std::size_t k = 0; k < n.arity; ++k) {
        if (k > 0 && e.node(n.kids[k]).op == Op::Const &&
            e.node(n.kids[k - 1]).op == Op::Const) {
          throw Error(Errc::NotRepresentable, "adjacent constant operands");
        }
        emit(e, n.kids[k], out);
      }
      out.push_back(Token::close());
  }
}

class TokenParser {
 public:
  explicit TokenParser(std::span<const Token> tokens) : tokens_(tokens) {}

  Expr parse_program() {
    if (tokens_.empty() || tokens_.front().kind() != TokenKind::Start) {
      throw Error(Errc::MissingDelimiter, "program must begin with <s>");
    }
    if (tokens_.back().kind() != TokenKind::End) {
      throw Error(Errc::MissingDelimiter, "program must end with </s>");
    }
    pos_ = 1;
    const std::size_t stop = tokens_.size() - 1;
    for (std::size_t i = 1; i < stop; ++i) {
      if (tokens_[i].kind() == TokenKind::Start || tokens_[i].kind() == TokenKind::End) {
        throw Error(Errc::MissingDelimiter, "delimiter inside program body");
      }
    }
    end_ = stop;
    if (pos_ == end_) throw Error(Errc::ArityMismatch, "empty program");
    Expr e = parse_expr();
    if (pos_ != end_) {
      if (tokens_[pos_].kind() == TokenKind::Close) {
        throw Error(Errc::UnbalancedParens, "unexpected ')'");
      }
      throw Error(Errc::ArityMismatch, "trailing tokens after program body");
    }
    return e;
  }

 private:
  Expr parse_expr() {
    if (pos_ >= end_) throw Error(Errc::UnbalancedParens, "unexpected end of program");
    const Token t = tokens_[pos_];
    switch (t.kind()) {
      case TokenKind::Variable:
        ++pos_;
        return Expr::var(t.value());
      case TokenKind::Nibble: {
        std::uint64_t value = 0;
        while (pos_ < end_ && tokens_[pos_].kind() == TokenKind::Nibble) {
          value = (value << 4) | tokens_[pos_].value();
          if (value > 0xFFFFFFFFull) {
            throw Error(Errc::TypeMismatch, "constant exceeds 32 bits");
          }
          ++pos_;
        }
        return Expr::constant(static_cast<std::uint32_t>(value));
      }
      case TokenKind::Open:
        break;
      case TokenKind::Close:
        throw Error(Errc::UnbalancedParens, "unexpected ')'");
      case TokenKind::Operator:
        throw Error(Errc::ArityMismatch,
                    "operator " + t.text() + " outside an application");
      default:
        throw Error(Errc::MissingDelimiter, "delimiter inside program body");
    }
    ++pos_;
    if (pos_ >= end_) throw Error(Errc::UnbalancedParens, "unclosed '('");
    const Token head = tokens_[pos_];
    if (head.kind() != TokenKind::Operator) {
      throw Error(Errc::ArityMismatch, "application must start with an operator");
    }
    ++pos_;
    std::vector<Expr> args;
    while (pos_ < end_ && tokens_[pos_].kind() != TokenKind::Close) {
      args.push_back(parse_expr());
    }
    if (pos_ >= end_) throw Error(Errc::UnbalancedParens, "unclosed '('");
    ++pos_;
    return Expr::make(head.opcode(), args);
  }

  std::span<const Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace

Token Token::variable(unsigned index) {
  if (index >= kVariableTokens) {
    throw Error(Errc::UnknownToken, "v" + std::to_string(index));
  }
  return Token(TokenKind::Variable, index);
}

Token Token::nibble(unsigned value) {
  if (value >= kNibbleTokens) {
    throw Error(Errc::UnknownToken, "nibble " + std::to_string(value));
  }
  return Token(TokenKind::Nibble, value);
}

Token Token::op(Op op) {
  if (op == Op::Var || op == Op::Const) {
    throw Error(Errc::UnknownToken, "leaves are not operator tokens");
  }
  return Token(TokenKind::Operator, static_cast<unsigned>(op));
}

Token Token::from_index(std::size_t index) {
  if (index == 0) return start();
  if (index == 1) return end();
  if (index == 2) return open();
  if (index == 3) return close();
  if (index < kFirstNibble) return variable(static_cast<unsigned>(index - kFirstVariable));
  if (index < kFirstOperator) return nibble(static_cast<unsigned>(index - kFirstNibble));
  if (index < kVocabularySize) {
    return op(static_cast<Op>(index - kFirstOperator + kFirstVocabOp));
  }
  throw Error(Errc::UnknownToken, "token index " + std::to_string(index));
}

std::size_t Token::index() const {
  switch (kind_) {
    case TokenKind::Start:
      return 0;
    case TokenKind::End:
      return 1;
    case TokenKind::Open:
      return 2;
    case TokenKind::Close:
      return 3;
    case TokenKind::Variable:
      return kFirstVariable + value_;
    case TokenKind::Nibble:
      return kFirstNibble + value_;
    case TokenKind::Operator:
      return kFirstOperator + value_ - kFirstVocabOp;
  }
  return 0;
}

std::string Token::text() const {
  switch (kind_) {
    case TokenKind::Start:
      return "<s>";
    case TokenKind::End:
      return "</s>";
    case TokenKind::Open:
      return "(";
    case TokenKind::Close:
      return ")";
    case TokenKind::Variable:
      return "v" + std::to_string(value_);
    case TokenKind::Nibble:
      return std::string("#") + kHex[value_];
    case TokenKind::Operator:
      return std::string(op_info(opcode()).mnemonic);
  }
  return {};
}

Token Token::from_text(std::string_view text) {
  if (text == "<s>") return start();
  if (text == "</s>") return end();
  if (text == "(") return open();
  if (text == ")") return close();
  if (text.size() == 2 && text[0] == 'v' && text[1] >= '0' && text[1] <= '5') {
    return variable(static_cast<unsigned>(text[1] - '0'));
  }
  if (text.size() == 2 && text[0] == '#') {
    const std::size_t digit = kHex.find(text[1]);
    if (digit != std::string_view::npos) return nibble(static_cast<unsigned>(digit));
  }
  for (std::size_t i = kFirstVocabOp; i < kOpCount; ++i) {
    if (op_info(static_cast<Op>(i)).mnemonic == text) return op(static_cast<Op>(i));
  }
  throw Error(Errc::UnknownToken, "'" + std::string(text) + "'");
}

std::vector<Token> vocabulary() {
  std::vector<Token> out;
  out.reserve(kVocabularySize);
  for (std::size_t i = 0; i < kVocabularySize; ++i) out.push_back(Token::from_index(i));
  return out;
}

std::vector<Token> print_tokens(const Program& p) {
  std::vector<Token> out{Token::start()};
  emit(p.expr(), 0, out);
  out.push_back(Token::end());
  return out;
}

bool is_token_representable(const Expr& e) {
  for (const Node& n : e.nodes()) {
    if (n.op == Op::Var && n.imm >= kVariableTokens) return false;
    for (std::size_t k = 1; k < n.arity; ++k) {
      if (e.node(n.kids[k]).op == Op::Const && e.node(n.kids[k - 1]).op == Op::Const) {
        return false;
      }
    }
  }
  return true;
}

std::size_t token_length(const Expr& e) {
  std::size_t len = 2;  // delimiters
  for (const Node& n : e.nodes()) {
    if (n.op == Op::Var) {
      len += 1;
    } else if (n.op == Op::Const) {
      std::uint32_t v = n.imm;
      do {
        ++len;
        v >>= 4;
      } while (v != 0);
    } else {
      len += 3;  // ( op )
    }
  }
  return len;
}

Program parse_tokens(std::span<const Token> tokens, std::optional<std::size_t> param_count) {
  Expr e = TokenParser(tokens).parse_program();
  if (e.sort() != Sort::Bool) {
    throw Error(Errc::TypeMismatch, "program root must be Boolean");
  }
  const std::size_t params =
      param_count.value_or(std::max<std::size_t>(1, e.var_bound()));
  return Program(std::move(e), params);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    out.push_back(Token::from_text(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::string tokens_to_text(std::span<const Token> tokens) {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.text();
  }
  return out;
}

std::vector<std::string> tokens_to_strings(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.text());
  return out;
}

}  // namespace invsynth
