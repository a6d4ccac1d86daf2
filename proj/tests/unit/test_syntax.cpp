#include <doctest.h>

#include <random>

#include "gsmpl/lexer.hpp"
#include "gsmpl/parser.hpp"
#include "gsmpl/printer.hpp"

using namespace gsmpl;

namespace {

Term t(std::string_view text) { return parse_term(text); }

// Random terms over the shapes the printer has to handle.
Term random_term(std::mt19937_64& rng, int depth) {
  static const char* atoms[] = {"a", "[]", "{}", "hello world", "Caps", "+", "-", "'", "x_1", ",", "|", "mod", "is"};
  static const char* functors[] = {"f", "+", "-", "*", "/", ":-", ",", ";", "->", "=", "is", "mod", "\\+",
                                   "g h", ".", "{}", "<", "=<", "**", "^"};
  int pick = static_cast<int>(rng() % (depth > 0 ? 6 : 3));
  switch (pick) {
    case 0: return Term::atom(atoms[rng() % std::size(atoms)]);
    case 1: {
      long long n = static_cast<long long>(rng() % 2001) - 1000;
      if (rng() % 3 == 0) return Term::num(Rational(n, 4));
      return Term::integer(n);
    }
    case 2: return Term::var(rng() % 4);
    case 3: {
      std::vector<Term> items;
      for (unsigned k = rng() % 4; k > 0; --k) items.push_back(random_term(rng, depth - 1));
      Term tail = rng() % 4 == 0 ? Term::var(5) : Term::nil();
      return Term::list(items, tail);
    }
    default: {
      std::string f = functors[rng() % std::size(functors)];
      std::size_t arity = 1 + rng() % 3;
      std::vector<Term> args;
      for (std::size_t k = 0; k < arity; ++k) args.push_back(random_term(rng, depth - 1));
      return Term::compound(f, std::move(args));
    }
  }
}

}  // namespace

TEST_CASE("tokenize") {
  auto toks = tokenize("foo(X, 'a b', \"s\") :- 3.5 % comment\n /* block */ .");
  REQUIRE(toks.size() == 12);
  CHECK(toks[0].kind == TokenKind::Name);
  CHECK(toks[2].kind == TokenKind::Var);
  CHECK(toks[4].kind == TokenKind::QuotedName);
  CHECK(toks[4].text == "a b");
  CHECK(toks[6].kind == TokenKind::String);
  CHECK(toks[9].kind == TokenKind::Decimal);
  CHECK(toks[10].kind == TokenKind::End);
  CHECK(toks[10].layout_before);
  CHECK(toks.back().kind == TokenKind::Eof);
}

TEST_CASE("lexical errors carry a position") {
  try {
    tokenize("a :- 'open");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position().line == 1);
    CHECK(e.kind() == ParseErrorKind::Unterminated);
  }
  CHECK_THROWS_AS(tokenize("x /* never closed"), ParseError);
}

TEST_CASE("operator precedence and associativity") {
  CHECK(t("1 + 2 * 3") == t("+(1, *(2, 3))"));
  CHECK(t("1 - 2 - 3") == t("-(-(1, 2), 3)"));
  CHECK(t("a , b , c") == t("','(a, ','(b, c))"));
  CHECK(t("a :- b, c ; d -> e") == t(":-(a, ;(','(b, c), ->(d, e)))"));
  CHECK(t("X is 7 mod 3 + 1") == t("is(X, +(mod(7, 3), 1))"));
  CHECK(t("- 1") == Term::integer(-1));
  CHECK(t("-(1)") == t("-(1)"));
  CHECK(t("- (1)").is_functor("-", 1));
  CHECK(t("a- 1") == t("-(a, 1)"));
  CHECK(t("2 ^ 3 ^ 2") == t("^(2, ^(3, 2))"));
  CHECK_THROWS_AS(t("2 ** 3 ** 2"), ParseError);
  CHECK_THROWS_AS(t("a = b = c"), ParseError);
}

TEST_CASE("lists and curly terms") {
  CHECK(t("[1, 2 | T]").is_cons());
  CHECK(t("[a]") == Term::cons(Term::atom("a"), Term::nil()));
  CHECK(t("'.'(1, [])") == t("[1]"));
  CHECK(t("{a, b}") == Term::compound("{}", {t("(a, b)")}));
  CHECK(t("{}").is_atom("{}"));
  CHECK(t("{}(a, b)") == Term::compound("{}", {Term::atom("a"), Term::atom("b")}));
  CHECK(t("'{}'(x)") == t("{x}"));
}

TEST_CASE("variables are numbered by first occurrence") {
  Term x = t("f(B, A, B, _, _)");
  CHECK(x.arg(0).var_id() == 0);
  CHECK(x.arg(1).var_id() == 1);
  CHECK(x.arg(2).var_id() == 0);
  CHECK(x.arg(3).var_id() != x.arg(4).var_id());
}

TEST_CASE("parse_program builds clauses, directives and an index") {
  Program p = parse_program(
      ":- use_module(library(clpq)).\n"
      "price(apple, 3).\n"
      "price(pear, 4).\n"
      "total(X) :- price(apple, A), price(pear, B), X is A + B.\n"
      "go.\n");
  CHECK(p.directives().size() == 1);
  REQUIRE(p.clauses().size() == 4);
  CHECK(p.clauses()[2].body.size() == 3);
  CHECK(p.clauses()[2].var_count == 3);
  auto* prices = p.lookup({"price", 2});
  REQUIRE(prices);
  CHECK(*prices == std::vector<std::size_t>{0, 1});
  CHECK(p.defines({"go", 0}));
  CHECK_FALSE(p.defines({"price", 1}));
}

TEST_CASE("invalid clause heads are rejected") {
  CHECK_THROWS_AS(parse_program("X :- true."), ParseError);
  CHECK_THROWS_AS(parse_program("3."), ParseError);
  CHECK_THROWS_AS(parse_program("f(X) :- 3."), ParseError);
  CHECK_THROWS_AS(parse_program("f(a)"), ParseError);
  CHECK(parse_program("").empty());
}

TEST_CASE("printer output") {
  CHECK(print_term(t("f(X, 'hello world', [1, 2.5])")) == "f(X,'hello world',[1,2.5])");
  CHECK(print_term(t("1 + 2")) == "+(1,2)");
  CHECK(print_term(t("-(1)")) == "-(1)");
  CHECK(print_term(Term::integer(-3)) == "-3");
  CHECK(print_term(t("{X = 1}")) == "{=(X,1)}");
  CHECK(print_term(Term::compound("f", {Term::var(3)})) == "f(_G3)");
  CHECK(quote_atom("[]") == "[]");
  CHECK(quote_atom("it's") == "'it\\'s'");
  CHECK(quote_atom("Abc") == "'Abc'");
}

TEST_CASE("property: index matches the clause list") {
  std::mt19937_64 rng(5);
  const char* names[] = {"p", "q", "r"};
  for (int round = 0; round < 100; ++round) {
    std::string src;
    std::size_t n = rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      std::string name = names[rng() % 3];
      std::size_t arity = rng() % 3;
      src += name;
      if (arity) {
        src += "(a";
        for (std::size_t k = 1; k < arity; ++k) src += ", X";
        src += ")";
      }
      src += rng() % 2 ? ".\n" : " :- true.\n";
    }
    Program p = parse_program(src);
    REQUIRE(p.clauses().size() == n);
    std::size_t indexed = 0;
    for (const auto& [key, positions] : p.index()) {
      for (std::size_t k = 0; k < positions.size(); ++k) {
        if (k) CHECK(positions[k - 1] < positions[k]);
        CHECK(key_of(p.clauses()[positions[k]].head) == key);
      }
      indexed += positions.size();
    }
    CHECK(indexed == n);
    for (const Clause& c : p.clauses()) {
      CHECK(c.head.is_callable());
      for (const Term& g : c.body) CHECK(g.is_callable());
    }
  }
}

TEST_CASE("property: printed terms read back as variants") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    Term term = random_term(rng, 4);
    std::string text = print_term(term);
    Term back;
    REQUIRE_NOTHROW(back = parse_term(text));
    INFO(text);
    CHECK(variant_equal(back, term));
  }
}

TEST_CASE("property: every broken input fails with one ParseError") {
  std::mt19937_64 rng(77);
  const std::string good = "solve(X) :- price(apple, P), {X = P * 3 + 1.5}, [a|T] = [a, b].\n";
  for (int i = 0; i < 2000; ++i) {
    std::string s = good;
    std::size_t cut = rng() % s.size();
    s = s.substr(0, cut) + s.substr(std::min(s.size(), cut + 1 + rng() % 3));
    try {
      parse_program(s);
    } catch (const ParseError& e) {
      CHECK(e.position().line >= 1);
      CHECK(e.position().line <= 2);
      CHECK(e.position().column >= 1);
    } catch (...) {
      FAIL("non-ParseError exception for: " << s);
    }
  }
}
