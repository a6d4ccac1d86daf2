#pragma once

#include <stdexcept>
#include <string>

#include "gsmpl/bindings.hpp"

namespace gsmpl {

/// Evaluation failed: unbound variable, non-numeric leaf, division by zero,
/// or `//`/`mod` applied to a non-integer.
class ArithmeticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The expression uses a standard evaluable function outside the supported
/// set (`round/1`, `**/2`, ...). `indicator` is `name/arity`.
class UnsupportedEvaluable : public std::runtime_error {
 public:
  explicit UnsupportedEvaluable(std::string indicator)
      : std::runtime_error("unsupported evaluable " + indicator), indicator_(std::move(indicator)) {}
  const std::string& indicator() const { return indicator_; }

 private:
  std::string indicator_;
};

/// Evaluates an arithmetic expression exactly. Supported: numbers, `+ - * /`,
/// `//` (truncating), `mod` (sign of divisor), unary `-`, `min/2`, `max/2`,
/// `abs/1`.
Rational eval_arith(const Term& expr, const Bindings& bindings);

}  // namespace gsmpl
