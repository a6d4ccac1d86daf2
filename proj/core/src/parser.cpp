#include "gsmpl/parser.hpp"

#include <algorithm>
#include <unordered_map>

namespace gsmpl {

PredicateKey key_of(const Term& callable) {
  return PredicateKey{callable.name(), callable.arity()};
}

void Program::add_clause(Clause clause) {
  index_[key_of(clause.head)].push_back(clauses_.size());
  clauses_.push_back(std::move(clause));
}

const std::vector<std::size_t>* Program::lookup(const PredicateKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &it->second;
}

std::optional<OpDef> infix_op(std::string_view name) {
  static const std::unordered_map<std::string_view, OpDef> kInfix = {
      {":-", {1200, OpType::XFX}},
      {";", {1100, OpType::XFY}},
      {"|", {1100, OpType::XFY}},
      {"->", {1050, OpType::XFY}},
      {",", {1000, OpType::XFY}},
      {"=", {700, OpType::XFX}},
      {"\\=", {700, OpType::XFX}},
      {"is", {700, OpType::XFX}},
      {"=:=", {700, OpType::XFX}},
      {"=\\=", {700, OpType::XFX}},
      {"<", {700, OpType::XFX}},
      {">", {700, OpType::XFX}},
      {"=<", {700, OpType::XFX}},
      {">=", {700, OpType::XFX}},
      // Parsed so that programs using them reach the engine and are reported
      // as unsupported built-ins rather than as unreadable text.
      {"==", {700, OpType::XFX}},
      {"\\==", {700, OpType::XFX}},
      {"=..", {700, OpType::XFX}},
      {"#=", {700, OpType::XFX}},
      {"#\\=", {700, OpType::XFX}},
      {"#<", {700, OpType::XFX}},
      {"#>", {700, OpType::XFX}},
      {"#=<", {700, OpType::XFX}},
      {"#>=", {700, OpType::XFX}},
      {"in", {700, OpType::XFX}},
      {"ins", {700, OpType::XFX}},
      {"..", {500, OpType::YFX}},
      {"+", {500, OpType::YFX}},
      {"-", {500, OpType::YFX}},
      {"*", {400, OpType::YFX}},
      {"/", {400, OpType::YFX}},
      {"//", {400, OpType::YFX}},
      {"mod", {400, OpType::YFX}},
      {"**", {200, OpType::XFX}},
      {"^", {200, OpType::XFY}},
      {":", {200, OpType::XFY}},
  };
  auto it = kInfix.find(name);
  if (it == kInfix.end()) return std::nullopt;
  return it->second;
}

std::optional<OpDef> prefix_op(std::string_view name) {
  static const std::unordered_map<std::string_view, OpDef> kPrefix = {
      {":-", {1200, OpType::FX}},
      {"?-", {1200, OpType::FX}},
      {"\\+", {900, OpType::FY}},
      {"-", {200, OpType::FY}},
  };
  auto it = kPrefix.find(name);
  if (it == kPrefix.end()) return std::nullopt;
  return it->second;
}

namespace {

// Syntactic nesting (brackets, prefix and right-associative operators) is
// parsed recursively and capped separately from structural depth.
constexpr std::size_t kMaxParseNesting = 4000;

struct Parsed {
  Term term;
  int priority = 0;
  std::size_t depth = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  bool at_eof() const { return cur().kind == TokenKind::Eof; }
  const Token& cur() const { return toks_[i_]; }

  // Reads one term up to (not including) the end dot.
  Parsed read(int max_priority) {
    vars_.clear();
    var_count_ = 0;
    return parse(max_priority, 0);
  }

  std::size_t var_count() const { return var_count_; }

  void expect_end() {
    const Token& t = cur();
    if (t.kind == TokenKind::End) {
      ++i_;
      return;
    }
    if (t.kind == TokenKind::Eof)
      throw ParseError(t.pos, ParseErrorKind::UnexpectedToken, "expected '.' at end of clause, found end of input");
    throw ParseError(t.pos, ParseErrorKind::UnexpectedToken, "expected operator or '.', found '" + t.text + "'");
  }

  void accept_end() {
    if (cur().kind == TokenKind::End) ++i_;
  }

 private:
  const Token& peek(std::size_t ahead = 1) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }

  [[noreturn]] void unexpected(const Token& t) const {
    if (t.kind == TokenKind::Eof)
      throw ParseError(t.pos, ParseErrorKind::UnexpectedToken, "unexpected end of input");
    if (t.kind == TokenKind::End)
      throw ParseError(t.pos, ParseErrorKind::UnexpectedToken, "unexpected end of clause");
    throw ParseError(t.pos, ParseErrorKind::UnexpectedToken, "unexpected '" + t.text + "'");
  }

  void expect_close(char c, const Token& opener) {
    const Token& t = cur();
    if (t.is_punct(c)) {
      ++i_;
      return;
    }
    if (t.kind == TokenKind::Eof)
      throw ParseError(opener.pos, ParseErrorKind::Unterminated,
                       std::string("'") + opener.text + "' is never closed");
    throw ParseError(t.pos, ParseErrorKind::UnexpectedToken,
                     std::string("expected '") + c + "', found '" + t.text + "'");
  }

  static void check_depth(std::size_t depth, const Token& at) {
    if (depth > kMaxTermDepth)
      throw ParseError(at.pos, ParseErrorKind::UnexpectedToken, "term nesting too deep");
  }

  // Tokens that cannot begin a term, so a preceding prefix operator is an atom.
  bool ends_operand(std::size_t at) const {
    const Token& t = toks_[at];
    switch (t.kind) {
      case TokenKind::Eof:
      case TokenKind::End:
        return true;
      case TokenKind::Punct:
        return t.text == ")" || t.text == "]" || t.text == "}" || t.text == "," || t.text == "|";
      case TokenKind::Name: {
        if (!infix_op(t.text) || prefix_op(t.text)) return false;
        const Token& after = toks_[std::min(at + 1, toks_.size() - 1)];
        return !(after.is_punct('(') && !after.layout_before);
      }
      default:
        return false;
    }
  }

  Term make_var(const std::string& name) {
    if (name == "_") return Term::var(var_count_++, name);
    auto [it, inserted] = vars_.emplace(name, var_count_);
    if (inserted) ++var_count_;
    return Term::var(it->second, name);
  }

  Parsed parse(int max_priority, std::size_t nesting) {
    if (nesting > kMaxParseNesting)
      throw ParseError(cur().pos, ParseErrorKind::UnexpectedToken, "term nesting too deep");
    Parsed left = parse_primary(max_priority, nesting);
    return parse_infix(std::move(left), max_priority, nesting);
  }

  Parsed parse_arglist_item(std::size_t nesting) { return parse(999, nesting + 1); }

  Parsed parse_primary(int max_priority, std::size_t nesting) {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Integer:
        ++i_;
        return {Term::num(Rational(parse_digits(t.text))), 0, 1};
      case TokenKind::Decimal: {
        ++i_;
        auto v = parse_decimal(t.text);
        if (!v) throw ParseError(t.pos, ParseErrorKind::Lex, "malformed number '" + t.text + "'");
        return {Term::num(*v), 0, 1};
      }
      case TokenKind::Var:
        ++i_;
        return {make_var(t.text), 0, 1};
      case TokenKind::String:
        ++i_;
        return {Term::atom(t.text), 0, 1};
      case TokenKind::Punct:
        return parse_punct_primary(t, nesting);
      case TokenKind::Name:
      case TokenKind::QuotedName:
        return parse_name(t, max_priority, nesting);
      case TokenKind::End:
      case TokenKind::Eof:
        break;
    }
    unexpected(t);
  }

  Parsed parse_punct_primary(const Token& t, std::size_t nesting) {
    if (t.text == "(") {
      ++i_;
      Parsed inner = parse(1200, nesting + 1);
      expect_close(')', t);
      return {std::move(inner.term), 0, inner.depth};
    }
    if (t.text == "[") {
      ++i_;
      if (cur().is_punct(']')) {
        ++i_;
        if (functional_next()) return parse_arguments("[]", t, nesting);
        return {Term::nil(), 0, 1};
      }
      std::vector<Term> items;
      std::size_t depth = 1;
      for (;;) {
        Parsed item = parse_arglist_item(nesting);
        depth = std::max(depth, item.depth + items.size() + 1);
        items.push_back(std::move(item.term));
        check_depth(depth, t);
        if (cur().is_punct(',')) {
          ++i_;
          continue;
        }
        break;
      }
      Term tail = Term::nil();
      if (cur().is_punct('|')) {
        ++i_;
        Parsed rest = parse_arglist_item(nesting);
        depth = std::max(depth, rest.depth + items.size());
        check_depth(depth, t);
        tail = std::move(rest.term);
      }
      expect_close(']', t);
      return {Term::list(items, std::move(tail)), 0, depth};
    }
    if (t.text == "{") {
      ++i_;
      if (cur().is_punct('}')) {
        ++i_;
        if (functional_next()) return parse_arguments("{}", t, nesting);
        return {Term::atom("{}"), 0, 1};
      }
      Parsed inner = parse(1200, nesting + 1);
      expect_close('}', t);
      check_depth(inner.depth + 1, t);
      return {Term::compound("{}", {std::move(inner.term)}), 0, inner.depth + 1};
    }
    unexpected(t);
  }

  // Argument list of `functor(`, with the current token at the open paren.
  Parsed parse_arguments(const std::string& functor, const Token& name, std::size_t nesting) {
    const Token& open = cur();
    ++i_;
    std::vector<Term> args;
    std::size_t depth = 1;
    for (;;) {
      Parsed a = parse_arglist_item(nesting);
      depth = std::max(depth, a.depth + 1);
      args.push_back(std::move(a.term));
      if (cur().is_punct(',')) {
        ++i_;
        continue;
      }
      break;
    }
    expect_close(')', open);
    check_depth(depth, name);
    return {Term::compound(functor, std::move(args)), 0, depth};
  }

  bool functional_next() const { return cur().is_punct('(') && !cur().layout_before; }

  Parsed parse_name(const Token& t, int max_priority, std::size_t nesting) {
    ++i_;
    const Token& next = cur();

    if (next.is_punct('(') && !next.layout_before) return parse_arguments(t.text, t, nesting);

    if (t.kind == TokenKind::Name && t.text == "-" &&
        (next.kind == TokenKind::Integer || next.kind == TokenKind::Decimal)) {
      Parsed n = parse_primary(0, nesting);
      return {Term::num(-n.term.value()), 0, 1};
    }

    if (auto op = prefix_op(t.text); op && !ends_operand(i_)) {
      if (op->priority > max_priority)
        throw ParseError(t.pos, ParseErrorKind::Operator,
                         "prefix operator '" + t.text + "' has priority " + std::to_string(op->priority) +
                             " above the allowed " + std::to_string(max_priority));
      int arg_max = op->type == OpType::FY ? op->priority : op->priority - 1;
      Parsed arg = parse(arg_max, nesting + 1);
      check_depth(arg.depth + 1, t);
      return {Term::compound(t.text, {std::move(arg.term)}), op->priority, arg.depth + 1};
    }

    return {Term::atom(t.text), 0, 1};
  }

  std::optional<std::pair<std::string, OpDef>> infix_at(const Token& t) const {
    if (t.kind == TokenKind::Punct && (t.text == "," || t.text == "|")) {
      auto op = infix_op(t.text);
      return std::make_pair(t.text == "|" ? std::string(";") : std::string(","), *op);
    }
    if (t.kind == TokenKind::Name || t.kind == TokenKind::QuotedName) {
      if (auto op = infix_op(t.text); op && t.text != "|") return std::make_pair(t.text, *op);
    }
    return std::nullopt;
  }

  Parsed parse_infix(Parsed left, int max_priority, std::size_t nesting) {
    for (;;) {
      const Token& t = cur();
      auto op = infix_at(t);
      if (!op) return left;
      const auto& [name, def] = *op;
      if (def.priority > max_priority) return left;
      int left_max = def.type == OpType::YFX ? def.priority : def.priority - 1;
      int right_max = def.type == OpType::XFY ? def.priority : def.priority - 1;
      if (left.priority > left_max)
        throw ParseError(t.pos, ParseErrorKind::Operator,
                         "operator priority clash at '" + t.text + "'");
      ++i_;
      Parsed right = parse(right_max, nesting + 1);
      std::size_t depth = std::max(left.depth, right.depth) + 1;
      check_depth(depth, t);
      left = {Term::compound(name, {std::move(left.term), std::move(right.term)}), def.priority, depth};
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::unordered_map<std::string, VarId> vars_;
  std::size_t var_count_ = 0;
};

void flatten_conjunction(const Term& t, std::vector<Term>& out) {
  const Term* cur = &t;
  while (cur->is_functor(",", 2)) {
    flatten_conjunction(cur->arg(0), out);
    cur = &cur->arg(1);
  }
  out.push_back(*cur);
}

}  // namespace

Clause make_clause(const Term& term, std::size_t var_count, SourcePos pos) {
  Clause clause;
  clause.var_count = var_count;
  clause.pos = pos;
  Term head = term;
  if (term.is_functor(":-", 2)) {
    head = term.arg(0);
    flatten_conjunction(term.arg(1), clause.body);
    for (Term& goal : clause.body) {
      if (goal.is_var()) goal = Term::compound("call", {goal});
      if (goal.is_num())
        throw ParseError(pos, ParseErrorKind::UnexpectedToken, "body goal is not callable");
    }
  }
  if (!head.is_callable())
    throw ParseError(pos, ParseErrorKind::UnexpectedToken, "clause head is not callable");
  clause.head = std::move(head);
  return clause;
}

Program parse_program(std::string_view source) {
  Parser p(tokenize(source));
  Program program;
  while (!p.at_eof()) {
    SourcePos start = p.cur().pos;
    Parsed t = p.read(1200);
    p.expect_end();
    if (t.term.is_functor(":-", 1) || t.term.is_functor("?-", 1)) {
      program.add_directive(t.term.arg(0));
      continue;
    }
    program.add_clause(make_clause(t.term, p.var_count(), start));
  }
  return program;
}

Term parse_term(std::string_view source) {
  Parser p(tokenize(source));
  if (p.at_eof()) throw ParseError(p.cur().pos, ParseErrorKind::UnexpectedToken, "empty term");
  Parsed t = p.read(1200);
  p.accept_end();
  if (!p.at_eof())
    throw ParseError(p.cur().pos, ParseErrorKind::UnexpectedToken, "unexpected '" + p.cur().text + "' after term");
  return t.term;
}

}  // namespace gsmpl
