#include "gsmpl/term.hpp"

#include <cassert>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace gsmpl {

struct Term::Node {
  TermKind kind = TermKind::Atom;
  std::string name;
  VarId id = 0;
  Rational value;
  std::vector<Term> args;
  bool ground = true;

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  // Long lists are deep right-nested chains; release them iteratively so
  // destruction never recurses once per cell.
  ~Node() {
    if (args.empty()) return;
    std::vector<std::shared_ptr<const Node>> pending;
    auto drain = [&pending](std::vector<Term>& children) {
      for (Term& child : children)
        if (child.node_ && child.node_.use_count() == 1) pending.push_back(std::move(child.node_));
      children.clear();
    };
    drain(args);
    while (!pending.empty()) {
      std::shared_ptr<const Node> n = std::move(pending.back());
      pending.pop_back();
      if (n.use_count() == 1) drain(const_cast<Node&>(*n).args);
    }
  }
};

Term Term::atom(std::string_view name) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::Atom;
  n->name = std::string(name);
  return Term(std::move(n));
}

Term Term::var(VarId id, std::string_view name) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::Var;
  n->id = id;
  n->name = std::string(name);
  n->ground = false;
  return Term(std::move(n));
}

Term Term::num(Rational value) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::Num;
  n->value = std::move(value);
  return Term(std::move(n));
}

Term Term::integer(long long value) { return num(Rational(value)); }

Term Term::compound(std::string_view functor, std::vector<Term> args) {
  if (args.empty()) return atom(functor);
  auto n = std::make_shared<Node>();
  n->kind = TermKind::Compound;
  n->name = std::string(functor);
  for (const Term& a : args) {
    assert(!a.is_null());
    n->ground = n->ground && a.ground();
  }
  n->args = std::move(args);
  return Term(std::move(n));
}

Term Term::nil() {
  static const Term kNil = atom("[]");
  return kNil;
}

Term Term::cons(Term head, Term tail) {
  std::vector<Term> args;
  args.reserve(2);
  args.push_back(std::move(head));
  args.push_back(std::move(tail));
  return compound(".", std::move(args));
}

Term Term::list(std::span<const Term> items, Term tail) {
  Term result = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) result = cons(*it, std::move(result));
  return result;
}

TermKind Term::kind() const { return node_->kind; }

bool Term::is_atom(std::string_view name) const {
  return is_atom() && node_->name == name;
}

bool Term::is_functor(std::string_view name, std::size_t arity) const {
  return is_compound() && node_->args.size() == arity && node_->name == name;
}

const std::string& Term::name() const { return node_->name; }
VarId Term::var_id() const { return node_->id; }
const Rational& Term::value() const { return node_->value; }

std::span<const Term> Term::args() const {
  if (!node_) return {};
  return std::span<const Term>(node_->args);
}

std::size_t Term::arity() const { return node_ ? node_->args.size() : 0; }
bool Term::ground() const { return node_ ? node_->ground : true; }

bool operator==(const Term& a, const Term& b) {
  std::vector<std::pair<const Term*, const Term*>> stack{{&a, &b}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (x->node_ == y->node_) continue;
    if (!x->node_ || !y->node_) return false;
    if (x->kind() != y->kind()) return false;
    switch (x->kind()) {
      case TermKind::Atom:
        if (x->name() != y->name()) return false;
        break;
      case TermKind::Var:
        if (x->var_id() != y->var_id()) return false;
        break;
      case TermKind::Num:
        if (x->value() != y->value()) return false;
        break;
      case TermKind::Compound:
        if (x->name() != y->name() || x->arity() != y->arity()) return false;
        for (std::size_t i = 0; i < x->arity(); ++i) stack.emplace_back(&x->args()[i], &y->args()[i]);
        break;
    }
  }
  return true;
}

bool variant_equal(const Term& a, const Term& b) {
  std::unordered_map<VarId, VarId> forward, backward;
  std::vector<std::pair<const Term*, const Term*>> stack{{&a, &b}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (x->is_null() || y->is_null()) {
      if (x->is_null() != y->is_null()) return false;
      continue;
    }
    if (x->kind() != y->kind()) return false;
    switch (x->kind()) {
      case TermKind::Atom:
        if (x->name() != y->name()) return false;
        break;
      case TermKind::Var: {
        auto [fi, fnew] = forward.emplace(x->var_id(), y->var_id());
        auto [bi, bnew] = backward.emplace(y->var_id(), x->var_id());
        if (fi->second != y->var_id() || bi->second != x->var_id()) return false;
        break;
      }
      case TermKind::Num:
        if (x->value() != y->value()) return false;
        break;
      case TermKind::Compound:
        if (x->name() != y->name() || x->arity() != y->arity()) return false;
        for (std::size_t i = x->arity(); i-- > 0;) stack.emplace_back(&x->args()[i], &y->args()[i]);
        break;
    }
  }
  return true;
}

void collect_vars(const Term& t, std::vector<VarId>& out) {
  std::vector<const Term*> stack{&t};
  while (!stack.empty()) {
    const Term* x = stack.back();
    stack.pop_back();
    if (x->is_null() || x->ground()) continue;
    if (x->is_var()) {
      out.push_back(x->var_id());
    } else if (x->is_compound()) {
      for (std::size_t i = x->arity(); i-- > 0;) stack.push_back(&x->args()[i]);
    }
  }
}

Term offset_vars(const Term& t, VarId offset) {
  if (t.is_null() || t.ground() || offset == 0) return t;
  if (t.is_var()) return Term::var(t.var_id() + offset);
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(offset_vars(a, offset));
  return Term::compound(t.name(), std::move(args));
}

}  // namespace gsmpl
