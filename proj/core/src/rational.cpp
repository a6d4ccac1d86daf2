#include "gsmpl/rational.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

namespace gsmpl {

namespace {

BigInt pow10(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

BigInt parse_digits(std::string_view digits) {
  BigInt value = 0;
  while (!digits.empty()) {
    std::size_t n = std::min<std::size_t>(digits.size(), 18);
    std::uint64_t chunk = 0;
    for (std::size_t i = 0; i < n; ++i) chunk = chunk * 10 + static_cast<std::uint64_t>(digits[i] - '0');
    value = value * pow10(static_cast<unsigned>(n)) + chunk;
    digits.remove_prefix(n);
  }
  return value;
}

bool is_integer(const Rational& value) {
  return boost::multiprecision::denominator(value) == 1;
}

std::optional<Rational> parse_decimal(std::string_view text) {
  std::string_view mantissa = text;
  std::string_view exponent;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    exponent = text.substr(e + 1);
    if (exponent.empty()) return std::nullopt;
  }
  std::string_view int_part = mantissa;
  std::string_view frac_part;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    int_part = mantissa.substr(0, dot);
    frac_part = mantissa.substr(dot + 1);
    if (!all_digits(frac_part)) return std::nullopt;
  }
  if (!all_digits(int_part)) return std::nullopt;

  BigInt numerator = parse_digits(std::string(int_part) + std::string(frac_part));
  Rational value(numerator, pow10(static_cast<unsigned>(frac_part.size())));

  if (!exponent.empty()) {
    bool negative = false;
    if (exponent.front() == '+' || exponent.front() == '-') {
      negative = exponent.front() == '-';
      exponent.remove_prefix(1);
    }
    if (!all_digits(exponent) || exponent.size() > 4) return std::nullopt;
    unsigned n = static_cast<unsigned>(std::stoul(std::string(exponent)));
    Rational scale(pow10(n));
    value = negative ? Rational(value / scale) : Rational(value * scale);
  }
  return value;
}

std::string format_rational(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();

  // Terminating iff the reduced denominator has no prime factors but 2 and 5.
  BigInt rest = den;
  unsigned twos = 0, fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();

  unsigned digits = std::max(twos, fives);
  BigInt scaled = abs(num) * pow10(digits) / den;
  std::string s = scaled.str();
  if (s.size() <= digits) s.insert(0, digits - s.size() + 1, '0');
  s.insert(s.size() - digits, ".");
  return (num < 0 ? "-" : "") + s;
}

std::string format_fixed(const Rational& value, int digits) {
  const BigInt scale = pow10(static_cast<unsigned>(digits));
  Rational scaled = abs(value) * scale;
  BigInt num = boost::multiprecision::numerator(scaled);
  BigInt den = boost::multiprecision::denominator(scaled);
  BigInt rounded = (2 * num + den) / (2 * den);
  std::string s = rounded.str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits))
      s.insert(0, static_cast<std::size_t>(digits) - s.size() + 1, '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  return (value < 0 && rounded != 0 ? "-" : "") + s;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace gsmpl
