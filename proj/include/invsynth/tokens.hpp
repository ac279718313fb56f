// Token form of programs: the 50-symbol vocabulary shared with example-driven
// synthesizers.
//
//   index  0       <s>       start of program
//   index  1       </s>      end of program
//   index  2, 3    ( )
//   index  4..9    v0..v5    parameters
//   index 10..25   #0..#F    nibbles
//   index 26..49   operators, in Op order (bvnot .. ite)
//
// Grammar (prefix S-expressions):
//   program := <s> expr </s>
//   expr    := ( operator expr... ) | variable | nibble+
// A maximal run of nibbles is one constant, most-significant nibble first,
// zero-extended to 32 bits. Two constants therefore cannot be adjacent
// operands; such programs have no token form (print_tokens throws
// NotRepresentable).

#ifndef INVSYNTH_TOKENS_HPP
#define INVSYNTH_TOKENS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invsynth/expr.hpp"

namespace invsynth {

inline constexpr std::size_t kVocabularySize = 50;
inline constexpr std::size_t kVariableTokens = 6;
inline constexpr std::size_t kNibbleTokens = 16;
inline constexpr std::size_t kOperatorTokens = 24;
inline constexpr std::size_t kMaxProgramTokens = 100;

enum class TokenKind : std::uint8_t { Start, End, Open, Close, Variable, Nibble, Operator };

class Token {
 public:
  static Token start() { return Token(TokenKind::Start, 0); }
  static Token end() { return Token(TokenKind::End, 0); }
  static Token open() { return Token(TokenKind::Open, 0); }
  static Token close() { return Token(TokenKind::Close, 0); }
  static Token variable(unsigned index);
  static Token nibble(unsigned value);
  static Token op(Op op);
  // Throws UnknownToken.
  static Token from_index(std::size_t index);
  static Token from_text(std::string_view text);

  TokenKind kind() const { return kind_; }
  unsigned value() const { return value_; }
  Op opcode() const { return static_cast<Op>(value_); }
  std::size_t index() const;
  std::string text() const;

  friend bool operator==(const Token&, const Token&) = default;

 private:
  Token(TokenKind kind, unsigned value) : kind_(kind), value_(value) {}

  TokenKind kind_;
  unsigned value_;
};

std::vector<Token> vocabulary();

// Throws NotRepresentable when a variable index exceeds v5 or two constant
// operands are adjacent.
std::vector<Token> print_tokens(const Program& p);
bool is_token_representable(const Expr& e);
std::size_t token_length(const Expr& e);

// When param_count is omitted it is inferred as one past the largest
// variable referenced (at least 1).
Program parse_tokens(std::span<const Token> tokens,
                     std::optional<std::size_t> param_count = std::nullopt);

std::vector<Token> tokenize(std::string_view text);
std::string tokens_to_text(std::span<const Token> tokens);
std::vector<std::string> tokens_to_strings(std::span<const Token> tokens);

inline Program parse_program_text(std::string_view text,
                                  std::optional<std::size_t> param_count = std::nullopt) {
  return parse_tokens(tokenize(text), param_count);
}

inline std::string program_text(const Program& p) { return tokens_to_text(print_tokens(p)); }

}  // namespace invsynth

#endif  // INVSYNTH_TOKENS_HPP
