#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gsmpl/lexer.hpp"
#include "gsmpl/term.hpp"

namespace gsmpl {

struct PredicateKey {
  std::string name;
  std::size_t arity = 0;

  friend auto operator<=>(const PredicateKey&, const PredicateKey&) = default;
  std::string str() const { return name + "/" + std::to_string(arity); }
};

/// Key of a callable term: atom `a` is a/0, `f(x,y)` is f/2.
PredicateKey key_of(const Term& callable);

/// A fact or rule. Variable ids are local to the clause and dense in
/// [0, var_count).
struct Clause {
  Term head;
  std::vector<Term> body;
  std::size_t var_count = 0;
  SourcePos pos;

  bool is_fact() const { return body.empty(); }
};

/// A parsed knowledge base. Directives are recorded in source order and are
/// never executed.
class Program {
 public:
  Program() = default;

  void add_clause(Clause clause);
  void add_directive(Term directive) { directives_.push_back(std::move(directive)); }

  const std::vector<Clause>& clauses() const { return clauses_; }
  const std::vector<Term>& directives() const { return directives_; }
  const std::map<PredicateKey, std::vector<std::size_t>>& index() const { return index_; }

  /// Source-ordered clause positions for a predicate, or nullptr if none.
  const std::vector<std::size_t>* lookup(const PredicateKey& key) const;
  bool defines(const PredicateKey& key) const { return lookup(key) != nullptr; }
  bool empty() const { return clauses_.empty() && directives_.empty(); }

 private:
  std::vector<Clause> clauses_;
  std::vector<Term> directives_;
  std::map<PredicateKey, std::vector<std::size_t>> index_;
};

}  // namespace gsmpl
