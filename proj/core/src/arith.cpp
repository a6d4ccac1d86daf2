#include "gsmpl/arith.hpp"

#include <array>
#include <string_view>

#include "gsmpl/printer.hpp"

namespace gsmpl {

namespace {

bool known_unsupported(std::string_view name, std::size_t arity) {
  static constexpr std::array<std::string_view, 24> kUnary = {
      "round", "floor", "ceiling", "truncate", "integer", "float", "float_integer_part",
      "float_fractional_part", "sqrt", "sign", "exp", "log", "log2", "sin", "cos", "tan",
      "asin", "acos", "atan", "msb", "\\", "+", "random", "random_float"};
  static constexpr std::array<std::string_view, 14> kBinary = {
      "**", "^", "rem", "div", "gcd", "log", "atan2", "atan", ">>", "<<", "/\\", "\\/", "xor", "copysign"};
  static constexpr std::array<std::string_view, 6> kNullary = {"pi", "e", "inf", "nan", "random", "cputime"};
  auto has = [name](const auto& table) {
    for (std::string_view n : table)
      if (n == name) return true;
    return false;
  };
  switch (arity) {
    case 0: return has(kNullary);
    case 1: return has(kUnary);
    case 2: return has(kBinary);
    default: return false;
  }
}

BigInt require_integer(const Rational& v, std::string_view op) {
  if (!is_integer(v))
    throw ArithmeticError(std::string(op) + " expects integer operands, got " + format_rational(v));
  return boost::multiprecision::numerator(v);
}

Rational eval(const Term& expr, const Bindings& b, std::size_t depth) {
  if (depth > kMaxTermDepth) throw ArithmeticError("expression too deep");
  Term t = b.deref(expr);
  switch (t.kind()) {
    case TermKind::Num:
      return t.value();
    case TermKind::Var:
      throw ArithmeticError("unbound variable in arithmetic expression");
    case TermKind::Atom:
      if (known_unsupported(t.name(), 0)) throw UnsupportedEvaluable(t.name() + "/0");
      throw ArithmeticError("non-numeric value '" + t.name() + "' in arithmetic expression");
    case TermKind::Compound:
      break;
  }

  const std::string& f = t.name();
  if (t.arity() == 1) {
    if (f == "-") return -eval(t.arg(0), b, depth + 1);
    if (f == "abs") return abs(eval(t.arg(0), b, depth + 1));
  } else if (t.arity() == 2) {
    if (f == "+" || f == "-" || f == "*" || f == "/" || f == "//" || f == "mod" || f == "min" || f == "max") {
      Rational x = eval(t.arg(0), b, depth + 1);
      Rational y = eval(t.arg(1), b, depth + 1);
      if (f == "+") return x + y;
      if (f == "-") return x - y;
      if (f == "*") return x * y;
      if (f == "min") return y < x ? y : x;
      if (f == "max") return y > x ? y : x;
      if (f == "/") {
        if (y == 0) throw ArithmeticError("division by zero");
        return x / y;
      }
      BigInt xi = require_integer(x, f);
      BigInt yi = require_integer(y, f);
      if (yi == 0) throw ArithmeticError("division by zero");
      if (f == "//") return Rational(xi / yi);  // cpp_int division truncates
      BigInt r = xi % yi;
      if (r != 0 && ((r < 0) != (yi < 0))) r += yi;
      return Rational(r);
    }
  }
  if (known_unsupported(f, t.arity())) throw UnsupportedEvaluable(f + "/" + std::to_string(t.arity()));
  throw ArithmeticError("unknown arithmetic function " + quote_atom(f) + "/" + std::to_string(t.arity()));
}

}  // namespace

Rational eval_arith(const Term& expr, const Bindings& bindings) { return eval(expr, bindings, 0); }

}  // namespace gsmpl
