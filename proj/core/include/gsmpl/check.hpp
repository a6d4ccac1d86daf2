#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gsmpl/engine.hpp"
#include "gsmpl/rational.hpp"

namespace gsmpl {

/// Everything needed to run a candidate program for its answer.
struct RunSettings {
  EntrySpec entry;
  Budget budget;
  EngineOptions options;
};

/// Result of parsing and running a program against a gold value.
struct ProgramCheck {
  enum class Verdict { Correct, NotExecutable, WrongAnswer };

  Verdict verdict = Verdict::NotExecutable;
  /// `parse`, an abort reason, `no-solution`, `wrong-answer` or
  /// `non-numeric-answer`; empty when correct.
  std::string reason;
  /// Predicate indicator, error message or computed value.
  std::string detail;
  std::optional<Rational> value;

  bool correct() const { return verdict == Verdict::Correct; }
  /// `reason` followed by `detail` when there is one.
  std::string describe() const;
};

/// Parses `code`, runs the entry predicate and compares its numeric binding
/// with `gold`.
ProgramCheck check_program(std::string_view code, const Rational& gold, const RunSettings& settings = {});

/// Parses and runs `code` without a gold value; the outcome of the first
/// solution, with parse failures reported as Aborted(parse).
ExecutionOutcome execute_source(std::string_view code, const RunSettings& settings = {});

}  // namespace gsmpl
