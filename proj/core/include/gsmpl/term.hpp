#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsmpl/rational.hpp"

namespace gsmpl {

using VarId = std::uint64_t;

enum class TermKind : std::uint8_t { Atom, Var, Num, Compound };

/// Recursive algorithms over terms (printing, comparison, dereferencing)
/// refuse to go deeper than this; the parser rejects deeper input.
inline constexpr std::size_t kMaxTermDepth = 20000;

/// Immutable Prolog term with cheap copies. Lists are `'.'/2` cells ending in
/// the atom `[]`. A default-constructed Term is null and only useful as a
/// placeholder.
class Term {
 public:
  Term() = default;

  static Term atom(std::string_view name);
  static Term var(VarId id, std::string_view name = {});
  static Term num(Rational value);
  static Term integer(long long value);
  /// An empty argument list yields an atom, so compounds always have arity >= 1.
  static Term compound(std::string_view functor, std::vector<Term> args);
  static Term nil();
  static Term cons(Term head, Term tail);
  static Term list(std::span<const Term> items, Term tail = nil());

  bool is_null() const { return node_ == nullptr; }
  TermKind kind() const;
  bool is_atom() const { return node_ && kind() == TermKind::Atom; }
  bool is_var() const { return node_ && kind() == TermKind::Var; }
  bool is_num() const { return node_ && kind() == TermKind::Num; }
  bool is_compound() const { return node_ && kind() == TermKind::Compound; }
  bool is_callable() const { return is_atom() || is_compound(); }
  bool is_atom(std::string_view name) const;
  bool is_functor(std::string_view name, std::size_t arity) const;
  bool is_nil() const { return is_atom("[]"); }
  bool is_cons() const { return is_functor(".", 2); }

  /// Atom name, compound functor, or variable source name.
  const std::string& name() const;
  VarId var_id() const;
  const Rational& value() const;
  std::span<const Term> args() const;
  std::size_t arity() const;
  const Term& arg(std::size_t i) const { return args()[i]; }
  /// True when the term contains no variables.
  bool ground() const;

  /// Structural equality; variables compare by id.
  friend bool operator==(const Term& a, const Term& b);

  /// Identity of the shared node, for fast-path checks.
  bool same_node(const Term& other) const { return node_ == other.node_; }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Equality up to a consistent bijective renaming of variables.
bool variant_equal(const Term& a, const Term& b);

/// Appends every variable id in `t` (with repetition, left to right).
void collect_vars(const Term& t, std::vector<VarId>& out);

/// Rewrites every variable id as `id + offset` and drops source names.
/// Ground subterms are shared.
Term offset_vars(const Term& t, VarId offset);

}  // namespace gsmpl
