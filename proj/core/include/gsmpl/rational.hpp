#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace gsmpl {

/// Exact arbitrary-precision rational. Every number the interpreter and the
/// answer model touch is one of these; there is no floating representation.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

bool is_integer(const Rational& value);

/// Value of a non-empty string of decimal digits; leading zeros are
/// insignificant.
BigInt parse_digits(std::string_view digits);

/// Parses an unsigned decimal literal such as `12`, `2.50` or `1.5e3`.
std::optional<Rational> parse_decimal(std::string_view text);

/// Integer when the denominator is 1, terminating decimal when one exists
/// (`5/2` -> `2.5`), otherwise the exact fraction `n/d`.
std::string format_rational(const Rational& value);

/// Rounds half away from zero to `digits` decimal places and prints with
/// exactly that many fractional digits.
std::string format_fixed(const Rational& value, int digits);

/// Nearest double, for diagnostics only.
double to_double(const Rational& value);

}  // namespace gsmpl
