#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/source.hpp"

namespace sentinel {

enum class Tok {
  eof,
  ident,
  int_lit,
  float_lit,
  // keywords
  kw_data,
  kw_pred,
  kw_int,
  kw_uint,
  kw_float,
  kw_void,
  kw_bool,
  kw_null,
  kw_if,
  kw_else,
  kw_while,
  kw_return,
  kw_new,
  kw_ref,
  kw_requires,
  kw_ensures,
  kw_ensures_err,
  kw_exists,
  kw_emp,
  kw_true,
  kw_false,
  kw_inf,
  kw_min,
  kw_max,
  kw_inv,
  // punctuation
  lparen,
  rparen,
  lbrace,
  rbrace,
  lt,  // also opens spatial argument lists
  gt,
  comma,
  semi,
  colon,
  coloncolon,
  assign,  // =
  walrus,  // :=
  eq,      // ==
  ne,      // !=
  le,
  ge,
  amp,
  pipe,
  bang,
  star,
  plus,
  minus,
  dot,
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  long long ival = 0;
  double fval = 0;
  Span span;
  std::size_t off = 0;  // byte offset into the source
  std::size_t len = 0;
};

inline Tok keyword_kind(std::string_view s) {
  if (s == "data") return Tok::kw_data;
  if (s == "pred") return Tok::kw_pred;
  if (s == "int") return Tok::kw_int;
  if (s == "uint") return Tok::kw_uint;
  if (s == "float") return Tok::kw_float;
  if (s == "void") return Tok::kw_void;
  if (s == "bool") return Tok::kw_bool;
  if (s == "null") return Tok::kw_null;
  if (s == "if") return Tok::kw_if;
  if (s == "else") return Tok::kw_else;
  if (s == "while") return Tok::kw_while;
  if (s == "return") return Tok::kw_return;
  if (s == "new") return Tok::kw_new;
  if (s == "ref") return Tok::kw_ref;
  if (s == "requires") return Tok::kw_requires;
  if (s == "ensures") return Tok::kw_ensures;
  if (s == "ensures_err") return Tok::kw_ensures_err;
  if (s == "exists") return Tok::kw_exists;
  if (s == "emp") return Tok::kw_emp;
  if (s == "true") return Tok::kw_true;
  if (s == "false") return Tok::kw_false;
  if (s == "inf") return Tok::kw_inf;
  if (s == "min") return Tok::kw_min;
  if (s == "max") return Tok::kw_max;
  if (s == "inv") return Tok::kw_inv;
  return Tok::ident;
}

// Eager tokenizer. The whole token stream is materialized up front, which
// makes backtracking in the parser a matter of saving an index.
class Lexer {
 public:
  Lexer(std::string_view src, std::string file)
      : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next();
      bool done = t.kind == Tok::eof;
      out.push_back(std::move(t));
      if (done) return out;
    }
  }

 private:
  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (pos_ >= src_.size()) return;
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Span here() const { return Span{file_, line_, col_, line_, col_}; }

  void skip_trivia() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (peek() && peek() != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        Span start = here();
        advance();
        advance();
        while (!(peek() == '*' && peek(1) == '/')) {
          if (!peek()) throw ParseError(start, "unterminated block comment");
          advance();
        }
        advance();
        advance();
        continue;
      }
      return;
    }
  }

  Token make(Tok kind, std::size_t start, Span sp) {
    Token t;
    t.kind = kind;
    t.off = start;
    t.len = pos_ - start;
    t.text = std::string(src_.substr(start, t.len));
    sp.end_line = line_;
    sp.end_col = col_;
    t.span = sp;
    return t;
  }

  Token next() {
    Span sp = here();
    std::size_t start = pos_;
    char c = peek();
    if (!c) return make(Tok::eof, start, sp);

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
        advance();
      std::string_view base = src_.substr(start, pos_ - start);
      Tok kind = keyword_kind(base);
      // Primed names (exit values of loop-mutated variables) lex as part of
      // the identifier; a primed keyword is nonsense and stays an error
      // downstream because keyword_kind ran on the unprimed base only when
      // no prime follows.
      if (peek() == '\'') {
        while (peek() == '\'') advance();
        kind = Tok::ident;
      }
      Token t = make(kind, start, sp);
      return t;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      bool is_float = false;
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        is_float = true;
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      Token t = make(is_float ? Tok::float_lit : Tok::int_lit, start, sp);
      try {
        if (is_float)
          t.fval = std::stod(t.text);
        else
          t.ival = std::stoll(t.text);
      } catch (const std::exception&) {
        throw ParseError(sp, "numeric literal out of range: " + t.text);
      }
      return t;
    }

    auto two = [&](char second, Tok yes, Tok no) {
      advance();
      if (peek() == second) {
        advance();
        return make(yes, start, sp);
      }
      return make(no, start, sp);
    };

    switch (c) {
      case '(': advance(); return make(Tok::lparen, start, sp);
      case ')': advance(); return make(Tok::rparen, start, sp);
      case '{': advance(); return make(Tok::lbrace, start, sp);
      case '}': advance(); return make(Tok::rbrace, start, sp);
      case ',': advance(); return make(Tok::comma, start, sp);
      case ';': advance(); return make(Tok::semi, start, sp);
      case '.': advance(); return make(Tok::dot, start, sp);
      case '&': advance(); return make(Tok::amp, start, sp);
      case '|': advance(); return make(Tok::pipe, start, sp);
      case '*': advance(); return make(Tok::star, start, sp);
      case '+': advance(); return make(Tok::plus, start, sp);
      case '-': advance(); return make(Tok::minus, start, sp);
      case '<': return two('=', Tok::le, Tok::lt);
      case '>': return two('=', Tok::ge, Tok::gt);
      case '=': return two('=', Tok::eq, Tok::assign);
      case '!': return two('=', Tok::ne, Tok::bang);
      case ':': {
        advance();
        if (peek() == ':') {
          advance();
          return make(Tok::coloncolon, start, sp);
        }
        if (peek() == '=') {
          advance();
          return make(Tok::walrus, start, sp);
        }
        return make(Tok::colon, start, sp);
      }
      default:
        throw ParseError(sp, std::string("unexpected character '") + c + "'");
    }
  }
};

inline std::vector<Token> lex(std::string_view src, std::string file) {
  return Lexer(src, std::move(file)).run();
}

}  // namespace sentinel
