#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "gsmpl/bindings.hpp"
#include "gsmpl/program.hpp"

namespace gsmpl {

/// Hard limits on one query. All fields must be strictly positive.
struct Budget {
  std::uint64_t max_steps = 1'000'000;
  std::uint64_t max_depth = 10'000;
  std::chrono::milliseconds wall_timeout{5000};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct EngineOptions {
  bool occurs_check = false;
};

enum class AbortReason {
  Parse,
  UnknownPredicate,
  UnsupportedBuiltin,
  ArithmeticError,
  BudgetExhausted,
};

std::string_view to_string(AbortReason reason);

struct Solved {
  Term answer;
};
struct NoSolution {};
struct Aborted {
  AbortReason reason = AbortReason::BudgetExhausted;
  /// `name/arity` for predicate reasons, a message otherwise.
  std::string detail;
};

struct ExecutionOutcome {
  std::variant<Solved, NoSolution, Aborted> result;
  std::uint64_t steps = 0;

  bool is_solved() const { return std::holds_alternative<Solved>(result); }
  const Solved* solved() const { return std::get_if<Solved>(&result); }
  const Aborted* aborted() const { return std::get_if<Aborted>(&result); }

  /// One line: `Solved 42`, `NoSolution`, `Aborted unsupported-builtin \+/1`.
  std::string describe() const;
};

/// Predicate queried for a program's answer, `solve/1` by default.
struct EntrySpec {
  std::string name = "solve";
  std::size_t arity = 1;

  /// Parses `name/arity`; only arity 1 is accepted. Throws std::invalid_argument.
  static EntrySpec parse(std::string_view text);
  std::string str() const { return name + "/" + std::to_string(arity); }
};

/// Depth-first, left-to-right SLD resolution over one goal. Each call to
/// next() produces the following solution; bindings for the current solution
/// are visible through bindings() and resolve().
class Solver {
 public:
  enum class Status { Solution, Exhausted, Aborted };

  Solver(const Program& program, Term goal, Budget budget = {}, EngineOptions options = {});
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  Status next();

  const Bindings& bindings() const;
  /// Applies the current bindings to `t`. Throws std::length_error on
  /// terms deeper than kMaxTermDepth.
  Term resolve(const Term& t) const;
  std::uint64_t steps() const;
  /// Valid after next() returned Status::Aborted.
  const Aborted& abort_info() const;

 private:
  class Machine;
  std::unique_ptr<Machine> machine_;
};

/// Runs `entry` with one fresh variable and returns the first solution's
/// binding, fully dereferenced.
ExecutionOutcome run_entry(const Program& program, const EntrySpec& entry = {}, const Budget& budget = {},
                           const EngineOptions& options = {});

/// Whether `name/arity` is a standard Prolog built-in outside the supported
/// set; calling one aborts with AbortReason::UnsupportedBuiltin.
bool is_unsupported_builtin(const PredicateKey& key);

}  // namespace gsmpl
