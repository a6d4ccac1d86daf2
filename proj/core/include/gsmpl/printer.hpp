#pragma once

#include <string>
#include <string_view>

#include "gsmpl/program.hpp"

namespace gsmpl {

/// Canonical text: operators in functional notation, lists in bracket
/// notation, `{}`/1 in curly notation, atoms quoted only when needed.
/// Reading the text back yields the same term up to variable renaming.
std::string print_term(const Term& t);

/// Quotes an atom name if it would not read back as the same atom.
std::string quote_atom(std::string_view name);

std::string print_clause(const Clause& clause);

/// Directives first, then clauses, one per line.
std::string print_program(const Program& program);

}  // namespace gsmpl
