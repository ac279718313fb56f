#ifndef INVSYNTH_SEXPR_HPP
#define INVSYNTH_SEXPR_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace invsynth {

struct SourceLoc {
  std::size_t line = 1;
  std::size_t column = 1;
  std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
};

// Minimal SMT-LIB S-expression: an atom (symbol, numeral, literal, keyword or
// string) or a list. |quoted| symbols are unquoted; strings keep their quotes.
struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  SourceLoc loc;

  bool is_atom() const { return !is_list; }
  bool is_atom(std::string_view name) const { return !is_list && atom == name; }
  // The head symbol of a non-empty list whose first item is an atom.
  std::string_view head() const;
  std::string str() const;
};

// Parses a sequence of top-level S-expressions. ';' starts a line comment.
// Throws Error(SyntaxError) with the offending location.
std::vector<SExpr> parse_sexprs(std::string_view text);

// Reads exactly one S-expression from the front of `text`; returns the
// number of characters consumed, or 0 if `text` does not yet hold a complete
// expression.
std::size_t read_one_sexpr(std::string_view text, SExpr& out);

}  // namespace invsynth

#endif  // INVSYNTH_SEXPR_HPP
