#include "invsynth/sexpr.hpp"

#include <cctype>

#include "invsynth/error.hpp"

namespace invsynth {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::size_t pos() const { return pos_; }

  SExpr read() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    SExpr out;
    out.loc = loc_;
    const char c = text_[pos_];
    if (c == '(') {
      advance();
      out.is_list = true;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) fail("unclosed '('", out.loc);
        if (text_[pos_] == ')') {
          advance();
          return out;
        }
        out.items.push_back(read());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '|') {
      advance();
      while (pos_ < text_.size() && text_[pos_] != '|') out.atom += advance();
      if (pos_ >= text_.size()) fail("unterminated |symbol|", out.loc);
      advance();
      return out;
    }
    if (c == '"') {
      out.atom += advance();
      for (;;) {
        if (pos_ >= text_.size()) fail("unterminated string", out.loc);
        const char d = advance();
        out.atom += d;
        if (d == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            out.atom += advance();
            continue;
          }
          break;
        }
      }
      return out;
    }
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' ||
          d == '"' || d == '|') {
        break;
      }
      out.atom += advance();
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) { fail(what, loc_); }
  [[noreturn]] static void fail(const std::string& what, const SourceLoc& at) {
    throw Error(Errc::SyntaxError, at.str() + ": " + what);
  }

 private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++loc_.line;
      loc_.column = 1;
    } else {
      ++loc_.column;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  SourceLoc loc_;
};

}  // namespace

std::string_view SExpr::head() const {
  if (!is_list || items.empty() || items.front().is_list) return {};
  return items.front().atom;
}

std::string SExpr::str() const {
  if (!is_list) return atom;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ' ';
    out += items[i].str();
  }
  return out + ")";
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader reader(text);
  std::vector<SExpr> out;
  while (!reader.at_end()) out.push_back(reader.read());
  return out;
}

std::size_t read_one_sexpr(std::string_view text, SExpr& out) {
  // Cheap completeness check first so partial input is not an error.
  int depth = 0;
  bool seen = false;
  bool in_string = false;
  bool in_bar = false;
  bool in_atom = false;
  std::size_t i = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '"') in_string = false;
      continue;
    }
    if (in_bar) {
      if (c == '|') in_bar = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
      seen = true;
    } else if (c == '|') {
      in_bar = true;
      seen = true;
    } else if (c == '(') {
      ++depth;
      seen = true;
      in_atom = false;
    } else if (c == ')') {
      --depth;
      if (depth == 0) {
        ++i;
        break;
      }
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_atom && depth == 0) break;
    } else {
      seen = true;
      in_atom = true;
    }
  }
  if (!seen || depth != 0 || in_string || in_bar) return 0;
  if (depth == 0 && in_atom && i >= text.size()) return 0;
  Reader reader(text.substr(0, i));
  out = reader.read();
  return i;
}

}  // namespace invsynth
