#pragma once

#include <optional>
#include <string_view>

#include "gsmpl/program.hpp"

namespace gsmpl {

enum class OpType { XFX, XFY, YFX, FY, FX };

struct OpDef {
  int priority = 0;
  OpType type = OpType::XFX;
};

/// The fixed operator table of the accepted dialect. There are no
/// user-defined operators.
std::optional<OpDef> infix_op(std::string_view name);
std::optional<OpDef> prefix_op(std::string_view name);

/// Parses a whole program. Empty input yields an empty Program.
/// Throws ParseError.
Program parse_program(std::string_view source);

/// Parses a single term. A trailing end dot is accepted but not required.
/// Variable ids are assigned from 0 in order of first occurrence.
/// Throws ParseError.
Term parse_term(std::string_view source);

/// Converts a read term into clause form; `H :- B` splits the body on `,`.
/// Throws ParseError when the head is not callable.
Clause make_clause(const Term& term, std::size_t var_count, SourcePos pos = {});

}  // namespace gsmpl
