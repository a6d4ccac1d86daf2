#include "gsmpl/bindings.hpp"

#include <cassert>
#include <stdexcept>
#include <utility>

namespace gsmpl {

Term Bindings::deref(const Term& t) const {
  Term cur = t;
  while (cur.is_var()) {
    VarId id = cur.var_id();
    if (id >= slots_.size() || slots_[id].is_null()) break;
    cur = slots_[id];
  }
  return cur;
}

bool Bindings::is_bound(VarId id) const { return id < slots_.size() && !slots_[id].is_null(); }

const Term* Bindings::lookup(VarId id) const {
  return is_bound(id) ? &slots_[id] : nullptr;
}

void Bindings::bind(VarId id, Term value) {
  assert(!is_bound(id));
  if (id >= slots_.size()) slots_.resize(std::max<std::size_t>(id + 1, slots_.size() * 2));
  slots_[id] = std::move(value);
  trail_.push_back(id);
  ++bound_count_;
}

void Bindings::undo_to(Mark m) {
  while (trail_.size() > m) {
    slots_[trail_.back()] = Term();
    trail_.pop_back();
    --bound_count_;
  }
}

namespace {

Term resolve_rec(const Bindings& b, const Term& t, std::size_t depth) {
  if (depth > kMaxTermDepth) throw std::length_error("term too deep to resolve");
  Term d = b.deref(t);
  if (!d.is_compound() || d.ground()) return d;
  std::vector<Term> args;
  args.reserve(d.arity());
  bool changed = false;
  for (const Term& a : d.args()) {
    Term r = resolve_rec(b, a, depth + 1);
    changed = changed || !r.same_node(a);
    args.push_back(std::move(r));
  }
  if (!changed) return d;
  return Term::compound(d.name(), std::move(args));
}

bool occurs(const Bindings& b, VarId id, const Term& t) {
  std::vector<Term> stack{t};
  while (!stack.empty()) {
    Term x = b.deref(stack.back());
    stack.pop_back();
    if (x.is_var()) {
      if (x.var_id() == id) return true;
    } else if (x.is_compound() && !x.ground()) {
      for (const Term& a : x.args()) stack.push_back(a);
    }
  }
  return false;
}

}  // namespace

Term Bindings::resolve(const Term& t) const { return resolve_rec(*this, t, 0); }

bool unify(const Term& a, const Term& c, Bindings& b, const UnifyOptions& options) {
  const Bindings::Mark entry = b.mark();
  std::vector<std::pair<Term, Term>> stack;
  stack.emplace_back(a, c);
  std::size_t work = 0;
  auto fail = [&] {
    b.undo_to(entry);
    return false;
  };
  while (!stack.empty()) {
    if (++work > options.max_work) {
      b.undo_to(entry);
      throw UnifyWorkExceeded{};
    }
    Term x = b.deref(stack.back().first);
    Term y = b.deref(stack.back().second);
    stack.pop_back();
    if (x.same_node(y)) continue;
    if (x.is_var() && y.is_var() && x.var_id() == y.var_id()) continue;
    if (x.is_var() || y.is_var()) {
      // Bind the younger variable to the older so chains stay short.
      if (x.is_var() && y.is_var() && y.var_id() > x.var_id()) std::swap(x, y);
      if (!x.is_var()) std::swap(x, y);
      if (options.occurs_check && occurs(b, x.var_id(), y)) return fail();
      b.bind(x.var_id(), y);
      continue;
    }
    if (x.kind() != y.kind()) return fail();
    switch (x.kind()) {
      case TermKind::Atom:
        if (x.name() != y.name()) return fail();
        break;
      case TermKind::Num:
        if (x.value() != y.value()) return fail();
        break;
      case TermKind::Compound:
        if (x.arity() != y.arity() || x.name() != y.name()) return fail();
        if (x.ground() && y.ground() && x == y) break;
        for (std::size_t i = x.arity(); i-- > 0;) stack.emplace_back(x.arg(i), y.arg(i));
        break;
      case TermKind::Var:
        break;
    }
  }
  return true;
}

}  // namespace gsmpl
