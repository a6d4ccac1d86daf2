#include "gsmpl/engine.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gsmpl/arith.hpp"
#include "gsmpl/printer.hpp"

namespace gsmpl {

void Budget::validate() const {
  if (max_steps == 0) throw std::invalid_argument("budget: max_steps must be positive");
  if (max_depth == 0) throw std::invalid_argument("budget: max_depth must be positive");
  if (wall_timeout.count() <= 0) throw std::invalid_argument("budget: wall_timeout must be positive");
}

std::string_view to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::Parse: return "parse";
    case AbortReason::UnknownPredicate: return "unknown-predicate";
    case AbortReason::UnsupportedBuiltin: return "unsupported-builtin";
    case AbortReason::ArithmeticError: return "arithmetic-error";
    case AbortReason::BudgetExhausted: return "budget-exhausted";
  }
  return "unknown";
}

std::string ExecutionOutcome::describe() const {
  if (const auto* s = solved()) return "Solved " + print_term(s->answer);
  if (const auto* a = aborted()) {
    std::string out = "Aborted " + std::string(to_string(a->reason));
    if (!a->detail.empty()) out += " " + a->detail;
    return out;
  }
  return "NoSolution";
}

EntrySpec EntrySpec::parse(std::string_view text) {
  auto slash = text.rfind('/');
  if (slash == std::string_view::npos || slash == 0)
    throw std::invalid_argument("entry predicate must be name/arity, got '" + std::string(text) + "'");
  EntrySpec spec;
  spec.name = std::string(text.substr(0, slash));
  std::string_view arity = text.substr(slash + 1);
  if (arity != "1") throw std::invalid_argument("entry predicate must have arity 1, got '" + std::string(text) + "'");
  spec.arity = 1;
  return spec;
}

bool is_unsupported_builtin(const PredicateKey& key) {
  static const std::set<PredicateKey> kKnown = [] {
    std::set<PredicateKey> s;
    auto add = [&s](std::string_view name, std::initializer_list<std::size_t> arities) {
      for (std::size_t a : arities) s.insert(PredicateKey{std::string(name), a});
    };
    add("!", {0});
    add("\\+", {1});
    add("not", {1});
    add("call", {1, 2, 3, 4, 5, 6, 7, 8});
    add("once", {1});
    add("ignore", {1});
    add("forall", {2});
    add("findall", {3, 4});
    add("bagof", {3});
    add("setof", {3});
    add("aggregate_all", {3, 4});
    add("catch", {3});
    add("throw", {1});
    add("halt", {0, 1});
    add("assert", {1});
    add("asserta", {1});
    add("assertz", {1});
    add("retract", {1});
    add("retractall", {1});
    add("abolish", {1});
    add("format", {1, 2, 3});
    add("write", {1, 2});
    add("writeln", {1, 2});
    add("print", {1, 2});
    add("write_canonical", {1, 2});
    add("writeq", {1, 2});
    add("print_message", {2});
    add("nl", {0, 1});
    add("tab", {1, 2});
    add("read", {1, 2});
    add("read_term", {2, 3});
    add("length", {2});
    add("append", {2, 3});
    add("member", {2});
    add("memberchk", {2});
    add("nth0", {3, 4});
    add("nth1", {3, 4});
    add("last", {2});
    add("reverse", {2});
    add("sum_list", {2});
    add("sumlist", {2});
    add("max_list", {2});
    add("min_list", {2});
    add("max_member", {2});
    add("min_member", {2});
    add("list_to_set", {2});
    add("numlist", {3});
    add("msort", {2});
    add("sort", {2, 4});
    add("predsort", {3});
    add("exclude", {3});
    add("include", {3});
    add("partition", {4});
    add("maplist", {2, 3, 4, 5, 6, 7});
    add("foldl", {4, 5, 6});
    add("select", {3});
    add("delete", {3});
    add("subtract", {3});
    add("atom_length", {2});
    add("atom_number", {2});
    add("atom_codes", {2});
    add("atom_chars", {2});
    add("atom_string", {2});
    add("atom_concat", {3});
    add("atomic_list_concat", {2, 3});
    add("sub_atom", {5});
    add("char_code", {2});
    add("number_codes", {2});
    add("number_chars", {2});
    add("number_string", {2});
    add("string_concat", {3});
    add("string_chars", {2});
    add("string_codes", {2});
    add("string_to_atom", {2});
    add("split_string", {4});
    add("term_to_atom", {2});
    add("copy_term", {2});
    add("functor", {3});
    add("arg", {3});
    add("=..", {2});
    add("==", {2});
    add("\\==", {2});
    add("@<", {2});
    add("@>", {2});
    add("@=<", {2});
    add("@>=", {2});
    add("compare", {3});
    add("var", {1});
    add("nonvar", {1});
    add("number", {1});
    add("integer", {1});
    add("float", {1});
    add("atom", {1});
    add("atomic", {1});
    add("compound", {1});
    add("callable", {1});
    add("is_list", {1});
    add("ground", {1});
    add("plus", {3});
    add("dif", {2});
    add("#=", {2});
    add("#\\=", {2});
    add("#<", {2});
    add("#>", {2});
    add("#=<", {2});
    add("#>=", {2});
    add("in", {2});
    add("ins", {2});
    add("label", {1});
    add("labeling", {2});
    add("all_different", {1});
    add("all_distinct", {1});
    add("sum", {3});
    add("minimize", {1});
    add("maximize", {1});
    add("sup", {2});
    add("inf", {2});
    add("bb_inf", {3, 4});
    add("entailed", {1});
    add("use_module", {1, 2});
    add("ensure_loaded", {1});
    add("initialization", {1, 2});
    add("nb_getval", {2});
    add("b_getval", {2});
    add("nb_setval", {2});
    add("b_setval", {2});
    add("tab", {1});
    add("succ_or_zero", {1});
    add("string", {1});
    add("is_dict", {1});
    return s;
  }();
  return kKnown.count(key) > 0;
}

namespace {

struct AbortSignal {
  AbortReason reason;
  std::string detail;
};

struct Frame;
using Cont = std::shared_ptr<const Frame>;

struct Frame {
  Term goal;                     // null for a cut barrier
  std::size_t barrier = 0;       // choicepoint height to cut back to
  std::uint64_t depth = 0;
  Cont next;
};

Cont push_goal(Term goal, std::uint64_t depth, Cont next) {
  return std::make_shared<const Frame>(Frame{std::move(goal), 0, depth, std::move(next)});
}

Cont push_barrier(std::size_t height, Cont next) {
  return std::make_shared<const Frame>(Frame{Term(), height, 0, std::move(next)});
}

struct ChoicePoint {
  enum class Kind { Clauses, Alternative, Between } kind = Kind::Alternative;
  Bindings::Mark mark = 0;
  VarId var_mark = 0;
  std::size_t store_mark = 0;
  Cont cont;
  std::uint64_t depth = 0;
  // Clauses
  Term goal;
  const std::vector<std::size_t>* clauses = nullptr;
  std::size_t next_index = 0;
  // Between
  BigInt current;
  BigInt high;
  bool unbounded = false;
  Term var;
};

enum class Constraint { Done, Failed, Deferred };

struct Linear {
  Rational constant;
  std::map<VarId, Rational> coeffs;

  void add(const Linear& o, const Rational& scale) {
    constant += o.constant * scale;
    for (const auto& [v, c] : o.coeffs) {
      Rational& slot = coeffs[v];
      slot += c * scale;
      if (slot == 0) coeffs.erase(v);
    }
  }
};

}  // namespace

class Solver::Machine {
 public:
  Machine(const Program& program, Term goal, Budget budget, EngineOptions options)
      : program_(program), goal_(std::move(goal)), budget_(budget), options_(options) {
    budget_.validate();
    std::vector<VarId> ids;
    collect_vars(goal_, ids);
    for (VarId id : ids) next_var_ = std::max(next_var_, id + 1);
    start_ = std::chrono::steady_clock::now();
  }

  Status next() {
    if (state_ == State::Exhausted) return Status::Exhausted;
    if (state_ == State::Aborted) return Status::Aborted;
    try {
      if (state_ == State::Fresh) {
        if (!goal_.is_callable()) throw AbortSignal{AbortReason::UnsupportedBuiltin, "call/1"};
        cont_ = push_goal(goal_, 0, nullptr);
        state_ = State::Running;
      } else if (!backtrack()) {
        return finish(State::Exhausted);
      }
      for (;;) {
        if (!cont_) {
          if (store_.empty() || propagate()) return Status::Solution;
          if (!backtrack()) return finish(State::Exhausted);
          continue;
        }
        Cont frame = cont_;
        cont_ = frame->next;
        if (frame->goal.is_null()) {
          cut_to(frame->barrier);
          continue;
        }
        charge(frame->depth);
        if (!call(frame->goal, frame->depth) && !backtrack()) return finish(State::Exhausted);
      }
    } catch (const AbortSignal& a) {
      aborted_ = Aborted{a.reason, a.detail};
    } catch (const ArithmeticError& e) {
      aborted_ = Aborted{AbortReason::ArithmeticError, e.what()};
    } catch (const UnsupportedEvaluable& e) {
      aborted_ = Aborted{AbortReason::UnsupportedBuiltin, e.indicator()};
    } catch (const UnifyWorkExceeded&) {
      aborted_ = Aborted{AbortReason::BudgetExhausted, "unification work limit"};
    } catch (const std::length_error&) {
      aborted_ = Aborted{AbortReason::BudgetExhausted, "term depth limit"};
    } catch (const std::bad_alloc&) {
      aborted_ = Aborted{AbortReason::BudgetExhausted, "memory"};
    }
    return finish(State::Aborted);
  }

  const Bindings& bindings() const { return bindings_; }
  std::uint64_t steps() const { return steps_; }
  const Aborted& abort_info() const { return aborted_; }

 private:
  enum class State { Fresh, Running, Exhausted, Aborted };

  Status finish(State s) {
    state_ = s;
    choicepoints_.clear();
    store_.clear();
    cont_.reset();
    bindings_.undo_to(0);
    return s == State::Exhausted ? Status::Exhausted : Status::Aborted;
  }

  void charge(std::uint64_t depth) {
    if (++steps_ > budget_.max_steps)
      throw AbortSignal{AbortReason::BudgetExhausted, "steps"};
    if (depth > budget_.max_depth) throw AbortSignal{AbortReason::BudgetExhausted, "depth"};
    if ((steps_ & 1023) == 0 && std::chrono::steady_clock::now() - start_ > budget_.wall_timeout)
      throw AbortSignal{AbortReason::BudgetExhausted, "timeout"};
  }

  void cut_to(std::size_t height) {
    if (choicepoints_.size() > height) choicepoints_.resize(height);
  }

  bool unify_terms(const Term& a, const Term& b) {
    UnifyOptions u;
    u.occurs_check = options_.occurs_check;
    return unify(a, b, bindings_, u);
  }

  // Resumes the most recent alternative. Returns false when none is left.
  bool backtrack() {
    while (!choicepoints_.empty()) {
      ChoicePoint cp = std::move(choicepoints_.back());
      choicepoints_.pop_back();
      bindings_.undo_to(cp.mark);
      next_var_ = cp.var_mark;
      store_.resize(cp.store_mark);
      cont_ = cp.cont;
      charge(cp.depth);
      switch (cp.kind) {
        case ChoicePoint::Kind::Alternative:
          return true;
        case ChoicePoint::Kind::Clauses:
          if (try_clauses(cp.goal, cp.depth, *cp.clauses, cp.next_index)) return true;
          break;
        case ChoicePoint::Kind::Between:
          if (cp.unbounded || cp.current < cp.high) {
            ChoicePoint again = cp;
            again.current = cp.current + 1;
            choicepoints_.push_back(std::move(again));
          }
          bindings_.bind(cp.var.var_id(), Term::num(Rational(cp.current)));
          return true;
      }
    }
    return false;
  }

  void push_alternative(Cont alt, std::uint64_t depth) {
    ChoicePoint cp;
    cp.kind = ChoicePoint::Kind::Alternative;
    cp.mark = bindings_.mark();
    cp.var_mark = next_var_;
    cp.store_mark = store_.size();
    cp.cont = std::move(alt);
    cp.depth = depth;
    choicepoints_.push_back(std::move(cp));
  }

  bool call(const Term& raw_goal, std::uint64_t depth) {
    Term goal = bindings_.deref(raw_goal);
    if (goal.is_var() || goal.is_num()) throw AbortSignal{AbortReason::UnsupportedBuiltin, "call/1"};
    const std::string& f = goal.name();
    const std::size_t arity = goal.arity();

    if (arity == 0) {
      if (f == "true") return true;
      if (f == "fail" || f == "false") return false;
    } else if (arity == 1) {
      if (f == "{}") return solve_constraints(goal.arg(0));
    } else if (arity == 2) {
      if (f == ",") {
        cont_ = push_goal(goal.arg(0), depth, push_goal(goal.arg(1), depth, cont_));
        return true;
      }
      if (f == ";") {
        Term left = bindings_.deref(goal.arg(0));
        if (left.is_functor("->", 2)) {
          std::size_t height = choicepoints_.size();
          push_alternative(push_goal(goal.arg(1), depth, cont_), depth);
          cont_ = push_goal(left.arg(0), depth, push_barrier(height, push_goal(left.arg(1), depth, cont_)));
          return true;
        }
        push_alternative(push_goal(goal.arg(1), depth, cont_), depth);
        cont_ = push_goal(left, depth, cont_);
        return true;
      }
      if (f == "->") {
        std::size_t height = choicepoints_.size();
        cont_ = push_goal(goal.arg(0), depth, push_barrier(height, push_goal(goal.arg(1), depth, cont_)));
        return true;
      }
      if (f == "=") return unify_terms(goal.arg(0), goal.arg(1));
      if (f == "\\=") {
        Bindings::Mark m = bindings_.mark();
        bool unifiable = unify_terms(goal.arg(0), goal.arg(1));
        bindings_.undo_to(m);
        return !unifiable;
      }
      if ((f == "is" || is_comparison(f)) && !store_.empty() && !propagate()) return false;
      if (f == "is") return unify_terms(goal.arg(0), Term::num(eval_arith(goal.arg(1), bindings_)));
      if (is_comparison(f)) {
        Rational x = eval_arith(goal.arg(0), bindings_);
        Rational y = eval_arith(goal.arg(1), bindings_);
        return compare(f, x, y);
      }
      if (f == "succ") return succ(goal.arg(0), goal.arg(1));
    } else if (arity == 3) {
      if (f == "between") return between(goal, depth);
    }

    PredicateKey key{f, arity};
    if (const auto* clauses = program_.lookup(key)) return try_clauses(goal, depth, *clauses, 0);
    if (is_unsupported_builtin(key)) throw AbortSignal{AbortReason::UnsupportedBuiltin, key.str()};
    throw AbortSignal{AbortReason::UnknownPredicate, key.str()};
  }

  static bool is_comparison(const std::string& f) {
    return f == "=:=" || f == "=\\=" || f == "<" || f == ">" || f == "=<" || f == ">=";
  }

  static bool compare(const std::string& op, const Rational& x, const Rational& y) {
    if (op == "=:=") return x == y;
    if (op == "=\\=") return x != y;
    if (op == "<") return x < y;
    if (op == ">") return x > y;
    if (op == "=<") return x <= y;
    return x >= y;
  }

  bool first_arg_compatible(const Term& goal, const Term& head) const {
    if (goal.arity() == 0) return true;
    Term g = bindings_.deref(goal.arg(0));
    const Term& h = head.arg(0);
    if (g.is_var() || h.is_var()) return true;
    if (g.kind() != h.kind()) return false;
    switch (g.kind()) {
      case TermKind::Atom: return g.name() == h.name();
      case TermKind::Num: return g.value() == h.value();
      case TermKind::Compound: return g.arity() == h.arity() && g.name() == h.name();
      case TermKind::Var: return true;
    }
    return true;
  }

  bool try_clauses(const Term& goal, std::uint64_t depth, const std::vector<std::size_t>& clauses,
                   std::size_t from) {
    const auto& all = program_.clauses();
    for (std::size_t i = from; i < clauses.size(); ++i) {
      const Clause& clause = all[clauses[i]];
      if (!first_arg_compatible(goal, clause.head)) continue;
      std::size_t alt = i + 1;
      while (alt < clauses.size() && !first_arg_compatible(goal, all[clauses[alt]].head)) ++alt;
      Bindings::Mark mark = bindings_.mark();
      VarId offset = next_var_;
      if (!unify_terms(goal, offset_vars(clause.head, offset))) {
        bindings_.undo_to(mark);
        continue;
      }
      if (alt < clauses.size()) {
        ChoicePoint cp;
        cp.kind = ChoicePoint::Kind::Clauses;
        cp.mark = mark;
        cp.var_mark = offset;
        cp.store_mark = store_.size();
        cp.cont = cont_;
        cp.depth = depth;
        cp.goal = goal;
        cp.clauses = &clauses;
        cp.next_index = alt;
        choicepoints_.push_back(std::move(cp));
      }
      next_var_ = offset + clause.var_count;
      for (auto it = clause.body.rbegin(); it != clause.body.rend(); ++it)
        cont_ = push_goal(offset_vars(*it, offset), depth + 1, cont_);
      return true;
    }
    return false;
  }

  BigInt integer_arg(const Term& t, std::string_view pred) const {
    Term d = bindings_.deref(t);
    if (d.is_var()) throw ArithmeticError(std::string(pred) + ": arguments are not sufficiently instantiated");
    if (!d.is_num() || !is_integer(d.value()))
      throw ArithmeticError(std::string(pred) + ": expected an integer, got " + print_term(d));
    return boost::multiprecision::numerator(d.value());
  }

  bool between(const Term& goal, std::uint64_t depth) {
    BigInt low = integer_arg(goal.arg(0), "between/3");
    Term high_term = bindings_.deref(goal.arg(1));
    bool unbounded = high_term.is_atom("inf") || high_term.is_atom("infinite");
    BigInt high = unbounded ? BigInt(0) : integer_arg(high_term, "between/3");
    Term x = bindings_.deref(goal.arg(2));
    if (!x.is_var()) {
      BigInt v = integer_arg(x, "between/3");
      return v >= low && (unbounded || v <= high);
    }
    if (!unbounded && low > high) return false;
    if (unbounded || low < high) {
      ChoicePoint cp;
      cp.kind = ChoicePoint::Kind::Between;
      cp.mark = bindings_.mark();
      cp.var_mark = next_var_;
      cp.store_mark = store_.size();
      cp.cont = cont_;
      cp.depth = depth;
      cp.current = low + 1;
      cp.high = high;
      cp.unbounded = unbounded;
      cp.var = x;
      choicepoints_.push_back(std::move(cp));
    }
    bindings_.bind(x.var_id(), Term::num(Rational(low)));
    return true;
  }

  bool succ(const Term& a, const Term& b) {
    Term x = bindings_.deref(a);
    Term y = bindings_.deref(b);
    if (!x.is_var()) {
      BigInt v = integer_arg(x, "succ/2");
      if (v < 0) throw ArithmeticError("succ/2: negative argument");
      return unify_terms(y, Term::num(Rational(v + 1)));
    }
    if (y.is_var()) throw ArithmeticError("succ/2: arguments are not sufficiently instantiated");
    BigInt w = integer_arg(y, "succ/2");
    if (w < 0) throw ArithmeticError("succ/2: negative argument");
    if (w == 0) return false;
    return unify_terms(x, Term::num(Rational(w - 1)));
  }

  // Linear form of an arithmetic expression over unbound variables, or
  // nullopt if the expression is not linear under the current bindings.
  std::optional<Linear> linearize(const Term& expr, std::size_t depth) const {
    if (depth > kMaxTermDepth) throw ArithmeticError("expression too deep");
    Term t = bindings_.deref(expr);
    Linear out;
    if (t.is_num()) {
      out.constant = t.value();
      return out;
    }
    if (t.is_var()) {
      out.coeffs[t.var_id()] = 1;
      return out;
    }
    if (t.is_compound()) {
      const std::string& f = t.name();
      if (t.arity() == 2 && (f == "+" || f == "-" || f == "*" || f == "/")) {
        auto l = linearize(t.arg(0), depth + 1);
        auto r = linearize(t.arg(1), depth + 1);
        if (!l || !r) return std::nullopt;
        if (f == "+" || f == "-") {
          out = *l;
          out.add(*r, f == "+" ? Rational(1) : Rational(-1));
          return out;
        }
        if (f == "*") {
          if (l->coeffs.empty()) {
            out.add(*r, l->constant);
            return out;
          }
          if (r->coeffs.empty()) {
            out.add(*l, r->constant);
            return out;
          }
          return std::nullopt;
        }
        if (!r->coeffs.empty()) return std::nullopt;
        if (r->constant == 0) throw ArithmeticError("division by zero");
        out.add(*l, 1 / r->constant);
        return out;
      }
      if (t.arity() == 1 && f == "-") {
        auto l = linearize(t.arg(0), depth + 1);
        if (!l) return std::nullopt;
        out.add(*l, Rational(-1));
        return out;
      }
    }
    std::vector<VarId> vars;
    collect_vars(bindings_.resolve(t), vars);
    if (!vars.empty()) return std::nullopt;
    out.constant = eval_arith(t, bindings_);
    return out;
  }

  Constraint apply_constraint(const Term& raw) {
    Term c = bindings_.deref(raw);
    static const std::set<std::string, std::less<>> kRelations = {"=", "=:=", "=\\=", "<", ">", "=<", ">="};
    if (!c.is_compound() || c.arity() != 2 || !kRelations.count(c.name()))
      throw AbortSignal{AbortReason::UnsupportedBuiltin, "{}/1"};
    auto l = linearize(c.arg(0), 0);
    auto r = linearize(c.arg(1), 0);
    if (!l || !r) return Constraint::Deferred;
    Linear diff = *l;
    diff.add(*r, Rational(-1));
    const std::string& rel = c.name();
    if (diff.coeffs.empty()) return compare(rel == "=" ? "=:=" : rel, diff.constant, Rational(0))
                                        ? Constraint::Done
                                        : Constraint::Failed;
    if ((rel == "=" || rel == "=:=") && diff.coeffs.size() == 1) {
      const auto& [var, coeff] = *diff.coeffs.begin();
      bindings_.bind(var, Term::num(-diff.constant / coeff));
      return Constraint::Done;
    }
    return Constraint::Deferred;
  }

  // `{}`/1 over linear constraints. Equations with one unknown bind it at
  // once and ground relations are checked; the rest join a store that is
  // solved by Gaussian elimination whenever it may have changed, binding
  // every variable the equations determine. Non-ground inequalities and
  // nonlinear equations stay in the store as residual constraints.
  bool solve_constraints(const Term& body) {
    std::vector<Term> pending;
    std::vector<Term> stack{body};
    while (!stack.empty()) {
      Term t = bindings_.deref(stack.back());
      stack.pop_back();
      if (t.is_functor(",", 2)) {
        stack.push_back(t.arg(1));
        stack.push_back(t.arg(0));
      } else {
        pending.push_back(t);
      }
    }
    bool progress = true;
    while (!pending.empty() && progress) {
      progress = false;
      std::vector<Term> deferred;
      for (const Term& c : pending) {
        switch (apply_constraint(c)) {
          case Constraint::Done: progress = true; break;
          case Constraint::Failed: return false;
          case Constraint::Deferred: deferred.push_back(c); break;
        }
      }
      pending = std::move(deferred);
    }
    store_.insert(store_.end(), pending.begin(), pending.end());
    return store_.empty() || propagate();
  }

  // Re-solves the constraint store under the current bindings. Returns false
  // when it is inconsistent.
  bool propagate() {
    for (bool progress = true; progress;) {
      progress = false;
      struct Row {
        VarId pivot;
        Linear form;
      };
      std::vector<Row> basis;
      for (const Term& raw : store_) {
        Term c = bindings_.deref(raw);
        auto l = linearize(c.arg(0), 0);
        auto r = linearize(c.arg(1), 0);
        if (!l || !r) continue;
        Linear row = *l;
        row.add(*r, Rational(-1));
        const std::string& rel = c.name();
        if (row.coeffs.empty()) {
          if (!compare(rel == "=" ? "=:=" : rel, row.constant, Rational(0))) return false;
          continue;
        }
        if (rel != "=" && rel != "=:=") continue;
        for (const Row& b : basis) {
          auto it = row.coeffs.find(b.pivot);
          if (it != row.coeffs.end()) row.add(b.form, -it->second);
        }
        if (row.coeffs.empty()) {
          if (row.constant != 0) return false;
          continue;
        }
        const auto [pivot, coeff] = *row.coeffs.begin();
        Linear unit;
        unit.add(row, 1 / coeff);
        for (Row& b : basis) {
          auto it = b.form.coeffs.find(pivot);
          if (it != b.form.coeffs.end()) b.form.add(unit, -it->second);
        }
        basis.push_back({pivot, std::move(unit)});
      }
      for (const Row& b : basis) {
        if (b.form.coeffs.size() != 1) continue;
        if (!bindings_.deref(Term::var(b.pivot)).is_var()) continue;
        bindings_.bind(b.pivot, Term::num(-b.form.constant));
        progress = true;
      }
    }
    return true;
  }

  const Program& program_;
  Term goal_;
  Budget budget_;
  EngineOptions options_;
  Bindings bindings_;
  Cont cont_;
  std::vector<ChoicePoint> choicepoints_;
  std::vector<Term> store_;
  VarId next_var_ = 0;
  std::uint64_t steps_ = 0;
  State state_ = State::Fresh;
  Aborted aborted_;
  std::chrono::steady_clock::time_point start_;
};

Solver::Solver(const Program& program, Term goal, Budget budget, EngineOptions options)
    : machine_(std::make_unique<Machine>(program, std::move(goal), budget, options)) {}

Solver::~Solver() = default;

Solver::Status Solver::next() { return machine_->next(); }
const Bindings& Solver::bindings() const { return machine_->bindings(); }
Term Solver::resolve(const Term& t) const { return machine_->bindings().resolve(t); }
std::uint64_t Solver::steps() const { return machine_->steps(); }
const Aborted& Solver::abort_info() const { return machine_->abort_info(); }

ExecutionOutcome run_entry(const Program& program, const EntrySpec& entry, const Budget& budget,
                           const EngineOptions& options) {
  const Term answer_var = Term::var(0, "Answer");
  Solver solver(program, Term::compound(entry.name, {answer_var}), budget, options);
  ExecutionOutcome outcome;
  switch (solver.next()) {
    case Solver::Status::Solution:
      try {
        outcome.result = Solved{solver.resolve(answer_var)};
      } catch (const std::length_error&) {
        outcome.result = Aborted{AbortReason::BudgetExhausted, "term depth limit"};
      }
      break;
    case Solver::Status::Exhausted:
      outcome.result = NoSolution{};
      break;
    case Solver::Status::Aborted:
      outcome.result = solver.abort_info();
      break;
  }
  outcome.steps = solver.steps();
  return outcome;
}

}  // namespace gsmpl
