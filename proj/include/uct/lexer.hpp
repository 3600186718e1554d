#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "uct/value.hpp"

namespace uct {

struct Token {
  enum Kind { Ident, Int, Real, Str, Sym, End };
  Kind kind = End;
  std::string text;      // identifier, symbol spelling, or string contents
  long long int_val = 0;
  double real_val = 0;
  int line = 0;
  int col = 0;

  bool is_sym(std::string_view s) const { return kind == Sym && text == s; }
  bool is_ident(std::string_view s) const { return kind == Ident && text == s; }
};

/// Shared tokenizer for metamodel, expression, activity, and use-case text.
/// `//` comments run to end of line. Multi-character symbols use longest match.
class Lexer {
 public:
  explicit Lexer(std::string_view src) { lex(src); }

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  Token next() {
    const Token& t = peek();
    if (t.kind != Token::End) ++pos_;
    return t;
  }

  bool accept_sym(std::string_view s) {
    if (peek().is_sym(s)) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_ident(std::string_view s) {
    if (peek().is_ident(s)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Token expect_sym(std::string_view s) {
    if (!peek().is_sym(s)) fail("expected '" + std::string(s) + "'");
    return next();
  }

  Token expect_ident() {
    if (peek().kind != Token::Ident) fail("expected identifier");
    return next();
  }

  bool at_end() const { return peek().kind == Token::End; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Token::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", got " + got, t.line, t.col);
  }

 private:
  void lex(std::string_view src) {
    static const char* two_char[] = {"=>", "->", ":=", "::", "<=", ">=",
                                     "<:", "/=", "/:", "\\/", "/\\"};
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
      for (size_t k = 0; k < n; ++k) {
        if (src[i + k] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      i += n;
    };
    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
        continue;
      }
      if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
        while (i < src.size() && src[i] != '\n') advance(1);
        continue;
      }
      Token t;
      t.line = line;
      t.col = col;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        size_t j = i;
        while (j < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' ||
                (j == i && src[j] == '$')))
          ++j;
        t.kind = Token::Ident;
        t.text = std::string(src.substr(i, j - i));
        advance(j - i);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        bool real = false;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        if (j + 1 < src.size() && src[j] == '.' &&
            std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
          real = true;
          ++j;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
        std::string text(src.substr(i, j - i));
        if (real) {
          t.kind = Token::Real;
          t.real_val = std::stod(text);
        } else {
          t.kind = Token::Int;
          t.int_val = std::stoll(text);
        }
        t.text = text;
        advance(j - i);
      } else if (c == '"') {
        std::string s;
        size_t j = i + 1;
        while (j < src.size() && src[j] != '"') {
          if (src[j] == '\\' && j + 1 < src.size()) {
            char e = src[j + 1];
            s += (e == 'n') ? '\n' : e;
            j += 2;
          } else {
            s += src[j];
            ++j;
          }
        }
        if (j >= src.size()) throw ParseError("unterminated string", line, col);
        t.kind = Token::Str;
        t.text = s;
        advance(j + 1 - i);
      } else if (c == '@') {
        if (src.substr(i, 4) == "@pre") {
          t.kind = Token::Sym;
          t.text = "@pre";
          advance(4);
        } else {
          throw ParseError("unexpected character '@'", line, col);
        }
      } else {
        t.kind = Token::Sym;
        t.text = std::string(1, c);
        for (const char* s : two_char) {
          if (src.substr(i, 2) == s) {
            t.text = s;
            break;
          }
        }
        static const std::string singles = "(){}[],;:.=<>+-*/^|&";
        if (t.text.size() == 1 && singles.find(c) == std::string::npos)
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        advance(t.text.size());
      }
      tokens_.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::End;
    end.line = line;
    end.col = col;
    tokens_.push_back(end);
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace uct
