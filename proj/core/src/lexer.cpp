#include "gsmpl/lexer.hpp"

#include <cctype>

#include "gsmpl/rational.hpp"

namespace gsmpl {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Lex: return "lex";
    case ParseErrorKind::UnexpectedToken: return "unexpected-token";
    case ParseErrorKind::Unterminated: return "unterminated";
    case ParseErrorKind::Operator: return "operator";
  }
  return "unknown";
}

ParseError::ParseError(SourcePos pos, ParseErrorKind kind, std::string message)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                         std::string(to_string(kind)) + ": " + message),
      pos_(pos),
      kind_(kind),
      message_(std::move(message)) {}

namespace {

bool is_symbol_char(char c) {
  switch (c) {
    case '+': case '-': case '*': case '/': case '\\': case '^': case '<': case '>':
    case '=': case '~': case ':': case '.': case '?': case '@': case '#': case '&': case '$':
      return true;
    default:
      return false;
  }
}

bool is_alnum(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_layout(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      bool layout = skip_layout();
      Token tok = next_token();
      tok.layout_before = layout;
      bool done = tok.kind == TokenKind::Eof;
      out.push_back(std::move(tok));
      if (done) return out;
    }
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }
  bool at_end(std::size_t ahead = 0) const { return i_ + ahead >= src_.size(); }

  void advance() {
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  [[noreturn]] void fail(SourcePos at, std::string msg, ParseErrorKind kind = ParseErrorKind::Lex) const {
    throw ParseError(at, kind, std::move(msg));
  }

  bool skip_layout() {
    bool any = false;
    while (!at_end()) {
      char c = peek();
      if (is_layout(c)) {
        advance();
      } else if (c == '%') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        SourcePos start = pos_;
        advance();
        advance();
        while (!(peek() == '*' && peek(1) == '/')) {
          if (at_end()) fail(start, "unterminated block comment", ParseErrorKind::Unterminated);
          advance();
        }
        advance();
        advance();
      } else {
        break;
      }
      any = true;
    }
    return any;
  }

  Token make(TokenKind kind, std::string text, SourcePos at) const {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.pos = at;
    return t;
  }

  Token next_token() {
    SourcePos start = pos_;
    if (at_end()) return make(TokenKind::Eof, "", start);
    char c = peek();

    if (is_digit(c)) return number(start);

    if (c == '_' || std::isupper(static_cast<unsigned char>(c))) {
      std::string text;
      while (!at_end() && is_alnum(peek())) { text += peek(); advance(); }
      return make(TokenKind::Var, std::move(text), start);
    }

    if (std::islower(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80) {
      std::string text;
      while (!at_end() && is_alnum(peek())) { text += peek(); advance(); }
      return make(TokenKind::Name, std::move(text), start);
    }

    switch (c) {
      case '(': case ')': case '[': case ']': case '{': case '}': case ',': case '|':
        advance();
        return make(TokenKind::Punct, std::string(1, c), start);
      case '!': case ';':
        advance();
        return make(TokenKind::Name, std::string(1, c), start);
      case '\'':
        return quoted(start, '\'', TokenKind::QuotedName);
      case '"':
        return quoted(start, '"', TokenKind::String);
      default:
        break;
    }

    if (c == '.' && (at_end(1) || is_layout(peek(1)) || peek(1) == '%')) {
      advance();
      return make(TokenKind::End, ".", start);
    }

    if (is_symbol_char(c)) {
      std::string text;
      while (!at_end() && is_symbol_char(peek())) { text += peek(); advance(); }
      return make(TokenKind::Name, std::move(text), start);
    }

    fail(start, std::string("illegal character '") + c + "'");
  }

  Token number(SourcePos start) {
    std::string text;
    if (peek() == '0' && peek(1) == '\'') {
      advance();
      advance();
      unsigned long code = 0;
      if (peek() == '\\') {
        code = escape(start, '\'');
      } else if (peek() == '\'' && peek(1) == '\'') {
        advance();
        advance();
        code = '\'';
      } else if (at_end()) {
        fail(start, "unterminated character code");
      } else {
        code = utf8_char();
      }
      return make(TokenKind::Integer, std::to_string(code), start);
    }
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'o' || peek(1) == 'b')) {
      int base = peek(1) == 'x' ? 16 : peek(1) == 'o' ? 8 : 2;
      std::size_t save_i = i_;
      SourcePos save_pos = pos_;
      advance();
      advance();
      BigInt value = 0;
      std::size_t n = 0;
      for (; !at_end(); ++n) {
        char d = static_cast<char>(std::tolower(static_cast<unsigned char>(peek())));
        int v = is_digit(d) ? d - '0' : (d >= 'a' && d <= 'f') ? d - 'a' + 10 : 99;
        if (v >= base) break;
        value = value * base + v;
        advance();
      }
      if (n > 0) return make(TokenKind::Integer, value.str(), start);
      i_ = save_i;
      pos_ = save_pos;
    }

    while (!at_end() && is_digit(peek())) { text += peek(); advance(); }
    bool decimal = false;
    if (peek() == '.' && is_digit(peek(1))) {
      decimal = true;
      text += '.';
      advance();
      while (!at_end() && is_digit(peek())) { text += peek(); advance(); }
      if ((peek() == 'e' || peek() == 'E') &&
          (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
        text += peek();
        advance();
        if (peek() == '+' || peek() == '-') { text += peek(); advance(); }
        while (!at_end() && is_digit(peek())) { text += peek(); advance(); }
      }
    }
    return make(decimal ? TokenKind::Decimal : TokenKind::Integer, std::move(text), start);
  }

  unsigned long utf8_char() {
    auto lead = static_cast<unsigned char>(peek());
    int extra = lead < 0x80 ? 0 : (lead >> 5) == 0x6 ? 1 : (lead >> 4) == 0xE ? 2 : 3;
    unsigned long cp = extra == 0 ? lead : extra == 1 ? (lead & 0x1F) : extra == 2 ? (lead & 0x0F) : (lead & 0x07);
    advance();
    for (int k = 0; k < extra && !at_end(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(peek()) & 0x3F);
      advance();
    }
    return cp;
  }

  // Consumes a backslash escape and returns the code point it denotes.
  unsigned long escape(SourcePos start, char quote) {
    advance();  // backslash
    if (at_end()) fail(start, "unterminated quoted item", ParseErrorKind::Unterminated);
    char e = peek();
    advance();
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 'a': return '\a';
      case 'b': return '\b';
      case 'f': return '\f';
      case 'v': return '\v';
      case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
        unsigned long v = static_cast<unsigned long>(e - '0');
        while (!at_end() && peek() >= '0' && peek() <= '7') { v = v * 8 + static_cast<unsigned long>(peek() - '0'); advance(); }
        if (peek() != '\\') fail(start, "malformed octal escape");
        advance();
        return v;
      }
      case 'x': {
        unsigned long v = 0;
        int n = 0;
        while (!at_end() && std::isxdigit(static_cast<unsigned char>(peek()))) {
          char d = static_cast<char>(std::tolower(static_cast<unsigned char>(peek())));
          v = v * 16 + static_cast<unsigned long>(is_digit(d) ? d - '0' : d - 'a' + 10);
          advance();
          ++n;
        }
        if (n == 0 || peek() != '\\') fail(start, "malformed hex escape");
        advance();
        return v;
      }
      case '\\': case '\'': case '"': case '`':
        return static_cast<unsigned char>(e);
      default:
        (void)quote;
        fail(start, std::string("undefined escape sequence \\") + e);
    }
  }

  Token quoted(SourcePos start, char quote, TokenKind kind) {
    advance();
    std::string text;
    for (;;) {
      if (at_end()) fail(start, "unterminated quoted item", ParseErrorKind::Unterminated);
      char c = peek();
      if (c == quote) {
        if (peek(1) == quote) {
          text += quote;
          advance();
          advance();
          continue;
        }
        advance();
        return make(kind, std::move(text), start);
      }
      if (c == '\\') {
        if (peek(1) == '\n') {  // line continuation
          advance();
          advance();
          continue;
        }
        append_utf8(text, escape(start, quote));
        continue;
      }
      if (c == '\n') fail(start, "newline inside quoted item");
      text += c;
      advance();
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace gsmpl
