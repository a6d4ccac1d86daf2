#include "gsmpl/check.hpp"

#include "gsmpl/answer.hpp"
#include "gsmpl/lexer.hpp"
#include "gsmpl/parser.hpp"
#include "gsmpl/printer.hpp"

namespace gsmpl {

std::string ProgramCheck::describe() const {
  if (detail.empty()) return reason;
  return reason + " " + detail;
}

ExecutionOutcome execute_source(std::string_view code, const RunSettings& settings) {
  Program program;
  try {
    program = parse_program(code);
  } catch (const ParseError& e) {
    return ExecutionOutcome{Aborted{AbortReason::Parse, e.what()}, 0};
  }
  return run_entry(program, settings.entry, settings.budget, settings.options);
}

ProgramCheck check_program(std::string_view code, const Rational& gold, const RunSettings& settings) {
  ProgramCheck check;
  ExecutionOutcome outcome = execute_source(code, settings);
  if (const Aborted* a = outcome.aborted()) {
    check.reason = std::string(to_string(a->reason));
    check.detail = a->detail;
    return check;
  }
  const Solved* s = outcome.solved();
  if (!s) {
    check.reason = "no-solution";
    return check;
  }
  if (!s->answer.is_num()) {
    check.verdict = ProgramCheck::Verdict::WrongAnswer;
    check.reason = "non-numeric-answer";
    check.detail = print_term(s->answer);
    return check;
  }
  check.value = s->answer.value();
  if (answers_equal(*check.value, gold)) {
    check.verdict = ProgramCheck::Verdict::Correct;
    return check;
  }
  check.verdict = ProgramCheck::Verdict::WrongAnswer;
  check.reason = "wrong-answer";
  check.detail = "got " + format_rational(*check.value) + " expected " + format_rational(gold);
  return check;
}

}  // namespace gsmpl
