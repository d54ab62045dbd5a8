#include "chrconf/specs.hpp"

#include <cctype>
#include <stdexcept>

#include "chrconf/program.hpp"

namespace chrconf {

namespace {

struct SpecLexer {
  const std::string& text;
  std::size_t idx = 0;
  int line = 1, col = 1;

  explicit SpecLexer(const std::string& t) : text(t) {}

  void skip_ws() {
    while (idx < text.size()) {
      char c = text[idx];
      if (c == '%') {
        while (idx < text.size() && text[idx] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  void advance() {
    if (text[idx] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++idx;
  }
  bool eof() {
    skip_ws();
    return idx >= text.size();
  }
  char peek() {
    skip_ws();
    return idx < text.size() ? text[idx] : '\0';
  }
  [[noreturn]] void fail(const std::string& message) {
    throw ParseError(SourcePos{line, col}, message);
  }
  bool try_consume(const std::string& s) {
    skip_ws();
    if (text.compare(idx, s.size(), s) == 0) {
      for (std::size_t i = 0; i < s.size(); ++i) advance();
      return true;
    }
    return false;
  }
  void expect(const std::string& s) {
    if (!try_consume(s)) fail("expected '" + s + "'");
  }
  std::string ident() {
    skip_ws();
    std::string out;
    while (idx < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[idx])) || text[idx] == '_')) {
      out += text[idx];
      advance();
    }
    if (out.empty()) fail("expected an identifier");
    return out;
  }

  Term term() {
    skip_ws();
    char c = peek();
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      bool negative = try_consume("-");
      std::string digits;
      while (idx < text.size() && std::isdigit(static_cast<unsigned char>(text[idx]))) {
        digits += text[idx];
        advance();
      }
      if (digits.empty()) fail("expected an integer");
      std::int64_t v = std::stoll(digits);
      return Term::integer(negative ? -v : v);
    }
    if (c == '[') {
      advance();
      if (peek() == ']') {
        advance();
        return Term::nil();
      }
      std::vector<Term> items;
      items.push_back(comparison());
      while (try_consume(",")) items.push_back(comparison());
      Term tail = Term::nil();
      if (try_consume("|")) tail = comparison();
      expect("]");
      return Term::list(items, tail);
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') return Term::var(ident());
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string name = ident();
      if (peek() == '(') {
        advance();
        std::vector<Term> args;
        args.push_back(comparison());
        while (try_consume(",")) args.push_back(comparison());
        expect(")");
        return Term::compound(name, std::move(args));
      }
      return Term::constant(name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Term additive() {
    Term lhs = term();
    for (;;) {
      skip_ws();
      if (try_consume("+"))
        lhs = Term::compound("+", {lhs, term()});
      else if (idx < text.size() && text[idx] == '-' && idx + 1 < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[idx + 1])) ||
                std::isalpha(static_cast<unsigned char>(text[idx + 1])) || text[idx + 1] == '_' ||
                std::isspace(static_cast<unsigned char>(text[idx + 1])))) {
        advance();
        lhs = Term::compound("-", {lhs, term()});
      } else {
        break;
      }
    }
    return lhs;
  }

  Term comparison() {
    Term lhs = additive();
    skip_ws();
    for (const char* op : {"=<", ">=", "==", "=", "<", ">"}) {
      if (text.compare(idx, std::char_traits<char>::length(op), op) == 0) {
        // "<" inside templates is handled by the caller; comparisons only
        // appear in argument or constraint position here.
        for (std::size_t i = 0; i < std::char_traits<char>::length(op); ++i) advance();
        Term rhs = additive();
        return Term::compound(op, {lhs, rhs});
      }
    }
    return lhs;
  }
};

TypeExpr parse_type_expr(SpecLexer& lex) {
  std::string name = lex.ident();
  if (name == "var") return TypeExpr::base(TypeExpr::Kind::VarName);
  if (name == "const") return TypeExpr::base(TypeExpr::Kind::ConstName);
  if (name == "int") return TypeExpr::base(TypeExpr::Kind::IntName);
  if (name == "list") {
    lex.expect("(");
    TypeExpr elem = parse_type_expr(lex);
    lex.expect(")");
    return TypeExpr::list_of(std::move(elem));
  }
  if (name == "constraints") {
    lex.expect("(");
    std::string functor = lex.ident();
    std::vector<TypeExpr> args;
    if (lex.try_consume("(")) {
      args.push_back(parse_type_expr(lex));
      while (lex.try_consume(",")) args.push_back(parse_type_expr(lex));
      lex.expect(")");
    }
    lex.expect(")");
    return TypeExpr::constraints_of(std::move(functor), std::move(args));
  }
  return TypeExpr::named(std::move(name));
}

StateTemplate parse_state_template(SpecLexer& lex) {
  StateTemplate st;
  lex.expect("<");
  lex.expect("{");
  if (lex.peek() != '}' && lex.peek() != '|') {
    st.store.push_back(lex.term());
    while (lex.try_consume(",")) st.store.push_back(lex.term());
  }
  if (lex.try_consume("|")) {
    Term rest = lex.term();
    if (!rest.is_var()) lex.fail("store rest must be a variable");
    st.store_rest = rest.name();
  }
  lex.expect("}");
  if (lex.try_consume(";")) {
    if (!lex.try_consume("true")) {
      st.builtins.push_back(lex.comparison());
      while (lex.try_consume(",")) st.builtins.push_back(lex.comparison());
      if (lex.try_consume("|")) {
        Term rest = lex.term();
        if (!rest.is_var()) lex.fail("built-in rest must be a variable");
        st.builtin_rest = rest.name();
      }
    }
  }
  lex.expect(">");
  return st;
}

std::vector<MetaConstraint> parse_where(SpecLexer& lex, const TypeTable& types) {
  std::vector<MetaConstraint> out;
  do {
    std::string head = lex.ident();
    if (head == "type") {
      lex.expect("(");
      std::string type_name = lex.ident();
      lex.expect(",");
      Term subject = lex.term();
      lex.expect(")");
      if (!types.declared(type_name))
        lex.fail("undeclared type '" + type_name + "' (declare it before use)");
      out.push_back(MetaConstraint::type_of(type_name, subject));
    } else if (head == "perm") {
      lex.expect("(");
      Term l = lex.term();
      lex.expect(",");
      Term r = lex.term();
      lex.expect(")");
      out.push_back(MetaConstraint::perm(l, r));
    } else {
      lex.fail("expected 'type' or 'perm' constraint, got '" + head + "'");
    }
  } while (lex.try_consume(","));
  return out;
}

}  // namespace

CheckerSpec parse_cspec(const std::string& text) {
  CheckerSpec spec;
  SpecLexer lex(text);
  while (!lex.eof()) {
    std::string keyword = lex.ident();
    if (keyword == "type") {
      std::string name = lex.ident();
      lex.expect("=");
      spec.types.declare(name, parse_type_expr(lex));
      lex.expect(".");
    } else if (keyword == "invariant") {
      InvariantTemplate t;
      t.state = parse_state_template(lex);
      if (lex.try_consume("where")) t.where = parse_where(lex, spec.types);
      lex.expect(".");
      spec.invariant.templates.push_back(std::move(t));
    } else if (keyword == "equiv") {
      EquivTemplate t;
      t.left = parse_state_template(lex);
      lex.expect("~");
      t.right = parse_state_template(lex);
      if (lex.try_consume("where")) t.where = parse_where(lex, spec.types);
      lex.expect(".");
      spec.equivalence.templates.push_back(std::move(t));
    } else if (keyword == "split") {
      Term atom = lex.comparison();
      lex.expect(".");
      if (!atom.is_compound() || !builtins::is_comparison(atom.functor()))
        throw std::runtime_error("split declaration must be a built-in comparison");
      spec.split_candidates.push_back(atom);
    } else {
      lex.fail("unknown declaration '" + keyword + "'");
    }
  }
  return spec;
}

}  // namespace chrconf
