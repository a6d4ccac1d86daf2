#include <doctest.h>

#include <random>

#include "gsmpl/answer.hpp"
#include "gsmpl/rational.hpp"

using namespace gsmpl;

TEST_CASE("parse_digits ignores leading zeros") {
  CHECK(parse_digits("0") == 0);
  CHECK(parse_digits("0010") == 10);
  CHECK(parse_digits("012") == 12);
  CHECK(parse_digits("123456789012345678901234567890") == BigInt("123456789012345678901234567890"));
}

TEST_CASE("parse_decimal") {
  CHECK(*parse_decimal("12") == 12);
  CHECK(*parse_decimal("2.50") == Rational(5, 2));
  CHECK(*parse_decimal("0.25") == Rational(1, 4));
  CHECK(*parse_decimal("0.05") == Rational(1, 20));
  CHECK(*parse_decimal("1.5e3") == 1500);
  CHECK(*parse_decimal("25e-2") == Rational(1, 4));
  CHECK_FALSE(parse_decimal(""));
  CHECK_FALSE(parse_decimal("1."));
  CHECK_FALSE(parse_decimal("-3"));
  CHECK_FALSE(parse_decimal("1e"));
  CHECK_FALSE(parse_decimal("abc"));
}

TEST_CASE("format_rational") {
  CHECK(format_rational(Rational(42)) == "42");
  CHECK(format_rational(Rational(-7)) == "-7");
  CHECK(format_rational(Rational(5, 2)) == "2.5");
  CHECK(format_rational(Rational(-1, 8)) == "-0.125");
  CHECK(format_rational(Rational(1, 3)) == "1/3");
  CHECK(format_rational(Rational(-2, 3)) == "-2/3");
}

TEST_CASE("format_fixed rounds half away from zero") {
  CHECK(format_fixed(Rational(251, 10), 1) == "25.1");
  CHECK(format_fixed(Rational(1, 20), 1) == "0.1");
  CHECK(format_fixed(Rational(-1, 20), 1) == "-0.1");
  CHECK(format_fixed(Rational(1, 3), 2) == "0.33");
  CHECK(format_fixed(Rational(2), 1) == "2.0");
  CHECK(format_fixed(Rational(0), 0) == "0");
  CHECK(format_fixed(Rational(5, 2), 0) == "3");
}

TEST_CASE("property: terminating decimals round-trip through text") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 2000; ++i) {
    long long n = static_cast<long long>(rng() % 2000001) - 1000000;
    long long d = 1LL << (rng() % 8);
    for (unsigned k = rng() % 4; k > 0; --k) d *= 5;
    Rational value(n, d);
    std::string text = format_rational(value);
    auto back = normalize_number(text);
    REQUIRE(back);
    CHECK(*back == value);
  }
}

TEST_CASE("property: format_fixed stays within half a unit") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    Rational value(static_cast<long long>(rng() % 100000) - 50000, static_cast<long long>(rng() % 999) + 1);
    for (int digits : {0, 1, 3}) {
      auto shown = normalize_number(format_fixed(value, digits));
      REQUIRE(shown);
      Rational unit(1);
      for (int k = 0; k < digits; ++k) unit /= 10;
      Rational err = *shown - value;
      if (err < 0) err = -err;
      CHECK(err <= unit / 2);
    }
  }
}
