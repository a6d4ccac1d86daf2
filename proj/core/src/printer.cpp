#include "gsmpl/printer.hpp"

#include <cctype>

namespace gsmpl {

namespace {

bool is_symbol_char(char c) {
  return std::string_view("+-*/\\^<>=~:.?@#&$").find(c) != std::string_view::npos;
}

bool needs_quotes(std::string_view name) {
  if (name.empty()) return true;
  if (name == "[]" || name == "{}" || name == "!" || name == ";") return false;
  auto first = static_cast<unsigned char>(name.front());
  if (std::islower(first) || first >= 0x80) {
    for (char c : name) {
      auto u = static_cast<unsigned char>(c);
      if (!(std::isalnum(u) || c == '_' || u >= 0x80)) return true;
    }
    return false;
  }
  bool all_symbolic = true;
  for (char c : name) all_symbolic = all_symbolic && is_symbol_char(c);
  if (!all_symbolic) return true;
  // `/*` opens a comment and a trailing `.` can fuse with the end dot.
  return name.starts_with("/*") || name.back() == '.';
}

void print_number(const Rational& v, std::string& out) { out += format_rational(v); }

void print(const Term& t, std::string& out);

void print_list(const Term& t, std::string& out) {
  out += '[';
  const Term* cur = &t;
  bool first = true;
  while (cur->is_cons()) {
    if (!first) out += ',';
    first = false;
    print(cur->arg(0), out);
    cur = &cur->arg(1);
  }
  if (!cur->is_nil()) {
    out += '|';
    print(*cur, out);
  }
  out += ']';
}

void print(const Term& t, std::string& out) {
  if (t.is_null()) {
    out += "<null>";
    return;
  }
  switch (t.kind()) {
    case TermKind::Atom:
      out += quote_atom(t.name());
      return;
    case TermKind::Var:
      if (!t.name().empty() && t.name() != "_") {
        out += t.name();
      } else {
        out += "_G";
        out += std::to_string(t.var_id());
      }
      return;
    case TermKind::Num:
      print_number(t.value(), out);
      return;
    case TermKind::Compound:
      if (t.is_cons()) {
        print_list(t, out);
        return;
      }
      if (t.is_functor("{}", 1)) {
        out += '{';
        print(t.arg(0), out);
        out += '}';
        return;
      }
      out += quote_atom(t.name());
      out += '(';
      for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ',';
        print(t.arg(i), out);
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string quote_atom(std::string_view name) {
  if (!needs_quotes(name)) return std::string(name);
  std::string out = "'";
  for (char c : name) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '\'';
  return out;
}

std::string print_term(const Term& t) {
  std::string out;
  print(t, out);
  return out;
}

std::string print_clause(const Clause& clause) {
  std::string out = print_term(clause.head);
  if (!clause.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
      if (i) out += ", ";
      out += print_term(clause.body[i]);
    }
  }
  out += '.';
  return out;
}

std::string print_program(const Program& program) {
  std::string out;
  for (const Term& d : program.directives()) out += ":- " + print_term(d) + ".\n";
  for (const Clause& c : program.clauses()) out += print_clause(c) + "\n";
  return out;
}

}  // namespace gsmpl
