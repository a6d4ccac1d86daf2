#pragma once

#include <cstddef>
#include <vector>

#include "gsmpl/term.hpp"

namespace gsmpl {

/// Substitution from variable ids to terms, with a trail that undoes
/// bindings back to any earlier mark.
class Bindings {
 public:
  using Mark = std::size_t;

  /// Follows variable bindings until reaching a non-variable or an unbound
  /// variable.
  Term deref(const Term& t) const;
  bool is_bound(VarId id) const;
  /// Binds an unbound variable and records it on the trail.
  void bind(VarId id, Term value);

  Mark mark() const { return trail_.size(); }
  void undo_to(Mark m);

  std::size_t size() const { return bound_count_; }
  bool empty() const { return bound_count_ == 0; }
  const Term* lookup(VarId id) const;

  /// Applies the substitution throughout `t`. Throws std::length_error when
  /// the result would be deeper than kMaxTermDepth (e.g. a cyclic binding).
  Term resolve(const Term& t) const;

 private:
  std::vector<Term> slots_;  // null Term == unbound
  std::vector<VarId> trail_;
  std::size_t bound_count_ = 0;
};

struct UnifyOptions {
  bool occurs_check = false;
  /// Upper bound on node pairs visited by one unification; rational trees
  /// created without the occurs check could otherwise loop forever.
  std::size_t max_work = 10'000'000;
};

/// Thrown when a unification exceeds UnifyOptions::max_work.
struct UnifyWorkExceeded {};

/// Extends `b` with a most general unifier of `a` and `c`. On failure the
/// bindings are restored to their state on entry.
bool unify(const Term& a, const Term& c, Bindings& b, const UnifyOptions& options = {});

}  // namespace gsmpl
