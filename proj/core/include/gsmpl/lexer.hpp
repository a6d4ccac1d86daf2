#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsmpl {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

enum class ParseErrorKind { Lex, UnexpectedToken, Unterminated, Operator };

std::string_view to_string(ParseErrorKind kind);

/// The single error every failed tokenize/parse produces.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, ParseErrorKind kind, std::string message);

  SourcePos position() const { return pos_; }
  ParseErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  ParseErrorKind kind_;
  std::string message_;
};

enum class TokenKind {
  Name,         // lowercase, symbolic or solo atom
  QuotedName,   // 'quoted atom'
  String,       // "double quoted"
  Var,
  Integer,
  Decimal,
  Punct,        // ( ) [ ] { } , |
  End,          // clause-terminating dot
  Eof,
};

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string text;  // unescaped text for quoted tokens, source text otherwise
  SourcePos pos;
  bool layout_before = false;  // whitespace or comment directly precedes

  bool is_punct(char c) const { return kind == TokenKind::Punct && text.size() == 1 && text[0] == c; }
  bool is_name(std::string_view s) const {
    return (kind == TokenKind::Name || kind == TokenKind::QuotedName) && text == s;
  }
};

/// Splits source into tokens, dropping `%` line comments and `/* */` block
/// comments. The result always ends with an Eof token. Throws ParseError(Lex).
std::vector<Token> tokenize(std::string_view source);

}  // namespace gsmpl
