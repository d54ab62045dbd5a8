#include "chrconf/program.hpp"

#include <algorithm>
#include <sstream>

#include "chrconf/builtins.hpp"

namespace chrconf {

std::vector<Term> Rule::head() const {
  std::vector<Term> h = kept;
  h.insert(h.end(), removed.begin(), removed.end());
  return h;
}

std::set<std::string> Rule::head_vars() const {
  std::set<std::string> vs;
  for (const Term& t : head())
    for (const auto& v : t.var_set()) vs.insert(v);
  return vs;
}

std::set<std::string> Rule::all_vars() const {
  std::set<std::string> vs = head_vars();
  for (const Term& t : guard)
    for (const auto& v : t.var_set()) vs.insert(v);
  for (const Term& t : body)
    for (const auto& v : t.var_set()) vs.insert(v);
  return vs;
}

std::set<std::string> Rule::local_vars() const {
  std::set<std::string> hv = head_vars();
  std::set<std::string> ls;
  for (const auto& v : all_vars())
    if (!hv.count(v)) ls.insert(v);
  return ls;
}

std::string Rule::to_string() const {
  std::ostringstream os;
  if (name) os << *name << " @ ";
  if (!kept.empty() && !removed.empty()) {
    os << chrconf::to_string(kept) << " \\ " << chrconf::to_string(removed) << " <=> ";
  } else if (removed.empty()) {
    os << chrconf::to_string(kept) << " ==> ";
  } else {
    os << chrconf::to_string(removed) << " <=> ";
  }
  if (!guard.empty()) os << chrconf::to_string(guard) << " | ";
  os << (body.empty() ? "true" : chrconf::to_string(body)) << ".";
  return os.str();
}

std::string Program::to_string() const {
  std::ostringstream os;
  for (const Rule& r : rules) os << r.to_string() << "\n";
  return os.str();
}

namespace {

enum class Tok {
  Atom,
  Var,
  Int,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Bar,
  Backslash,
  At,
  Dot,
  SimpArrow,   // <=>
  PropArrow,   // ==>
  Directive,   // :-
  Slash,
  Op,          // = == < =< > >= + -
  End
};

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    SourcePos pos{line_, col_};
    if (eof()) return {Tok::End, "", 0, pos};
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_int(pos);
    if (std::islower(static_cast<unsigned char>(c))) return lex_name(pos);
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') return lex_var(pos);
    if (c == '\'') return lex_quoted(pos);
    switch (c) {
      case '(': advance(); return {Tok::LParen, "(", 0, pos};
      case ')': advance(); return {Tok::RParen, ")", 0, pos};
      case '[': advance(); return {Tok::LBracket, "[", 0, pos};
      case ']': advance(); return {Tok::RBracket, "]", 0, pos};
      case ',': advance(); return {Tok::Comma, ",", 0, pos};
      case '|': advance(); return {Tok::Bar, "|", 0, pos};
      case '\\': advance(); return {Tok::Backslash, "\\", 0, pos};
      case '@': advance(); return {Tok::At, "@", 0, pos};
      case '+': advance(); return {Tok::Op, "+", 0, pos};
      case '.': advance(); return {Tok::Dot, ".", 0, pos};
      default: break;
    }
    if (starts_with("<=>")) return take(Tok::SimpArrow, "<=>", pos);
    if (starts_with("==>")) return take(Tok::PropArrow, "==>", pos);
    if (starts_with(":-")) return take(Tok::Directive, ":-", pos);
    if (starts_with("=<")) return take(Tok::Op, "=<", pos);
    if (starts_with(">=")) return take(Tok::Op, ">=", pos);
    if (starts_with("==")) return take(Tok::Op, "==", pos);
    if (starts_with("=")) return take(Tok::Op, "=", pos);
    if (starts_with("<")) return take(Tok::Op, "<", pos);
    if (starts_with(">")) return take(Tok::Op, ">", pos);
    if (starts_with("-")) return take(Tok::Op, "-", pos);
    if (starts_with("/")) return take(Tok::Slash, "/", pos);
    throw ParseError(pos, std::string("unexpected character '") + c + "'");
  }

 private:
  bool eof() const { return idx_ >= text_.size(); }
  char peek() const { return text_[idx_]; }
  void advance() {
    if (text_[idx_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++idx_;
  }
  bool starts_with(const char* s) const {
    return text_.compare(idx_, std::char_traits<char>::length(s), s) == 0;
  }
  Token take(Tok kind, const std::string& s, SourcePos pos) {
    for (std::size_t i = 0; i < s.size(); ++i) advance();
    return {kind, s, 0, pos};
  }
  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == '%') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  Token lex_int(SourcePos pos) {
    std::string digits;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      digits += peek();
      advance();
    }
    return {Tok::Int, digits, std::stoll(digits), pos};
  }
  Token lex_name(SourcePos pos) {
    std::string s;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      s += peek();
      advance();
    }
    return {Tok::Atom, s, 0, pos};
  }
  Token lex_var(SourcePos pos) {
    std::string s;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      s += peek();
      advance();
    }
    return {Tok::Var, s, 0, pos};
  }
  Token lex_quoted(SourcePos pos) {
    advance();  // opening quote
    std::string s;
    while (!eof() && peek() != '\'') {
      s += peek();
      advance();
    }
    if (eof()) throw ParseError(pos, "unterminated quoted atom");
    advance();  // closing quote
    return {Tok::Atom, s, 0, pos};
  }

  const std::string& text_;
  std::size_t idx_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { shift(); }

  Program parse() {
    Program prog;
    while (cur_.kind != Tok::End) {
      if (cur_.kind == Tok::Directive) {
        parse_directive();
      } else {
        prog.rules.push_back(parse_rule());
      }
    }
    classify_predicates(prog);
    return prog;
  }

  std::vector<Term> parse_goal_seq() {
    std::vector<Term> atoms = parse_constraint_seq();
    if (cur_.kind == Tok::Dot) shift();
    if (cur_.kind != Tok::End) throw ParseError(cur_.pos, "trailing input after goal");
    return atoms;
  }

 private:
  void shift() {
    if (have_pending_) {
      cur_ = pending_;
      have_pending_ = false;
    } else {
      cur_ = lexer_.next();
    }
  }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) throw ParseError(cur_.pos, std::string("expected ") + what);
    shift();
  }

  void parse_directive() {
    shift();  // :-
    if (cur_.kind != Tok::Atom || cur_.text != "builtin")
      throw ParseError(cur_.pos, "only ':- builtin name/arity.' directives are supported");
    shift();
    if (cur_.kind != Tok::Atom && cur_.kind != Tok::Op)
      throw ParseError(cur_.pos, "expected predicate name");
    std::string name = cur_.text;
    shift();
    expect(Tok::Slash, "'/'");
    if (cur_.kind != Tok::Int) throw ParseError(cur_.pos, "expected arity");
    std::size_t arity = static_cast<std::size_t>(cur_.value);
    SourcePos pos = cur_.pos;
    shift();
    expect(Tok::Dot, "'.'");
    if (!builtins::supported(name, arity))
      throw ParseError(pos, "declared built-in " + name + "/" + std::to_string(arity) +
                                " is outside the supported fragment");
  }

  Rule parse_rule() {
    Rule rule;
    SourcePos start = cur_.pos;
    // Optional "name @" prefix: an atom followed by '@'.
    if (cur_.kind == Tok::Atom) {
      Token save = cur_;
      std::string name = cur_.text;
      shift();
      if (cur_.kind == Tok::At) {
        rule.name = name;
        shift();
      } else {
        // Not a rule name: push the lookahead back.
        pending_ = cur_;
        cur_ = save;
        have_pending_ = true;
      }
    }
    std::vector<Term> first = parse_constraint_seq();
    std::vector<Term> second;
    bool simpagation = false;
    if (cur_.kind == Tok::Backslash) {
      simpagation = true;
      shift();
      second = parse_constraint_seq();
    }
    bool propagation = false;
    if (cur_.kind == Tok::SimpArrow) {
      shift();
    } else if (cur_.kind == Tok::PropArrow) {
      if (simpagation) throw ParseError(cur_.pos, "propagation rules cannot have a '\\' head");
      propagation = true;
      shift();
    } else {
      throw ParseError(cur_.pos, "expected '<=>' or '==>'");
    }
    std::vector<Term> third = parse_constraint_seq();
    std::vector<Term> guard, body;
    if (cur_.kind == Tok::Bar) {
      shift();
      guard = third;
      body = parse_constraint_seq();
    } else {
      body = third;
    }
    expect(Tok::Dot, "'.' at end of rule");

    if (simpagation) {
      rule.kept = first;
      rule.removed = second;
    } else if (propagation) {
      rule.kept = first;
    } else {
      rule.removed = first;
    }
    if (rule.kept.empty() && rule.removed.empty())
      throw ParseError(start, "rule head must not be empty");
    for (const Term& h : rule.head()) {
      if (h.is_var() || h.is_int())
        throw ParseError(start, "head constraint must be a user-constraint atom");
      if (builtins::supported(h.functor(), h.arity()))
        throw ParseError(start, "built-in predicate '" + h.functor() + "' cannot occur in a rule head");
    }
    rule.guard = guard;
    for (const Term& g : rule.guard) validate_builtin(g, start);
    if (body.empty()) throw ParseError(start, "rule body must not be empty (use 'true')");
    // Body 'true' is permitted and elided from stores.
    std::vector<Term> cleaned;
    for (const Term& b : body) {
      if (b.is_const() && b.name() == "true") continue;
      if (!b.is_var() && !b.is_int() && builtins::supported(b.functor(), b.arity()))
        validate_builtin(b, start);
      if (b.is_var() || b.is_int())
        throw ParseError(start, "body constraint must be an atom");
      cleaned.push_back(b);
    }
    rule.body = cleaned;
    return rule;
  }

  void validate_builtin(const Term& atom, SourcePos pos) {
    std::string why;
    if (!builtins::validate_atom(atom, &why))
      throw ParseError(pos, "unsupported built-in '" + atom.to_string() + "': " + why);
  }

  std::vector<Term> parse_constraint_seq() {
    std::vector<Term> out;
    out.push_back(parse_comparison());
    while (cur_.kind == Tok::Comma) {
      shift();
      out.push_back(parse_comparison());
    }
    return out;
  }

  Term parse_comparison() {
    Term lhs = parse_additive();
    if (cur_.kind == Tok::Op &&
        (cur_.text == "=" || cur_.text == "==" || cur_.text == "<" || cur_.text == "=<" ||
         cur_.text == ">" || cur_.text == ">=")) {
      std::string op = cur_.text;
      shift();
      Term rhs = parse_additive();
      return Term::compound(op, {lhs, rhs});
    }
    return lhs;
  }

  Term parse_additive() {
    Term lhs = parse_primary();
    while (cur_.kind == Tok::Op && (cur_.text == "+" || cur_.text == "-")) {
      std::string op = cur_.text;
      shift();
      Term rhs = parse_primary();
      lhs = Term::compound(op, {lhs, rhs});
    }
    return lhs;
  }

  Term parse_primary() {
    switch (cur_.kind) {
      case Tok::Int: {
        Term t = Term::integer(cur_.value);
        shift();
        return t;
      }
      case Tok::Op:
        if (cur_.text == "-") {
          shift();
          if (cur_.kind != Tok::Int) throw ParseError(cur_.pos, "expected integer after '-'");
          Term t = Term::integer(-cur_.value);
          shift();
          return t;
        }
        throw ParseError(cur_.pos, "unexpected operator '" + cur_.text + "'");
      case Tok::Var: {
        Term t = Term::var(cur_.text);
        shift();
        return t;
      }
      case Tok::Atom: {
        std::string name = cur_.text;
        shift();
        if (cur_.kind == Tok::LParen) {
          shift();
          std::vector<Term> args;
          args.push_back(parse_comparison());
          while (cur_.kind == Tok::Comma) {
            shift();
            args.push_back(parse_comparison());
          }
          expect(Tok::RParen, "')'");
          return Term::compound(name, std::move(args));
        }
        return Term::constant(name);
      }
      case Tok::LBracket: {
        shift();
        if (cur_.kind == Tok::RBracket) {
          shift();
          return Term::nil();
        }
        std::vector<Term> items;
        items.push_back(parse_comparison());
        while (cur_.kind == Tok::Comma) {
          shift();
          items.push_back(parse_comparison());
        }
        Term tail = Term::nil();
        if (cur_.kind == Tok::Bar) {
          shift();
          tail = parse_comparison();
        }
        expect(Tok::RBracket, "']'");
        return Term::list(items, tail);
      }
      case Tok::LParen: {
        shift();
        Term t = parse_comparison();
        expect(Tok::RParen, "')'");
        return t;
      }
      default:
        throw ParseError(cur_.pos, "expected a term");
    }
  }

  void classify_predicates(Program& prog) {
    auto note = [&prog](const Term& atom) {
      if (atom.is_int() || atom.is_var()) return;
      auto key = std::make_pair(atom.functor(), atom.arity());
      if (builtins::supported(key.first, key.second))
        prog.builtin_predicates.insert(key);
      else
        prog.user_predicates.insert(key);
    };
    for (const Rule& r : prog.rules) {
      for (const Term& t : r.head()) note(t);
      for (const Term& t : r.guard) note(t);
      for (const Term& t : r.body) note(t);
    }
  }

  Lexer lexer_;
  Token cur_;
  Token pending_;
  bool have_pending_ = false;
};

}  // namespace

Program parse_program(const std::string& text) {
  Parser p(text);
  return p.parse();
}

std::vector<Term> parse_goal(const std::string& text) {
  Parser p(text);
  return p.parse_goal_seq();
}

PreApplication make_pre_application(const Rule& rule, int rule_index, const Subst& sigma,
                                    const std::set<std::string>& avoid) {
  std::set<std::string> head_vars = rule.head_vars();
  std::set<std::string> locals = rule.local_vars();
  for (const auto& [v, t] : sigma.bindings()) {
    if (!head_vars.count(v))
      throw LocalVarCaptureError("substitution binds non-head variable " + v);
    for (const auto& rv : t.var_set())
      if (locals.count(rv))
        throw LocalVarCaptureError("binding of " + v + " captures local variable " + rv);
  }

  Subst renaming;
  std::set<std::string> avoid_all = avoid;
  for (const auto& [v, t] : sigma.bindings())
    for (const auto& rv : t.var_set()) avoid_all.insert(rv);

  std::vector<Term> all;
  all.insert(all.end(), rule.kept.begin(), rule.kept.end());
  all.insert(all.end(), rule.removed.begin(), rule.removed.end());
  all.insert(all.end(), rule.guard.begin(), rule.guard.end());
  all.insert(all.end(), rule.body.begin(), rule.body.end());
  rename_apart(all, avoid_all, &renaming);

  // Translate sigma to the fresh names, then apply.
  Subst inst;
  for (const auto& [v, t] : sigma.bindings()) {
    Term fresh = renaming.apply(Term::var(v));
    if (fresh.is_var()) inst.compose_bind(fresh.name(), t);
  }
  auto rename_then_apply = [&](const std::vector<Term>& ts) {
    return inst.apply(renaming.apply(ts));
  };

  PreApplication pre;
  pre.rule_index = rule_index;
  pre.instance.name = rule.name;
  pre.instance.kept = rename_then_apply(rule.kept);
  pre.instance.removed = rename_then_apply(rule.removed);
  pre.instance.guard = rename_then_apply(rule.guard);
  pre.instance.body = rename_then_apply(rule.body);
  pre.local_vars = pre.instance.local_vars();
  // Check again on the instance: no range term may have introduced a local.
  for (const auto& [v, t] : inst.bindings()) {
    (void)v;
    for (const auto& rv : t.var_set())
      if (pre.local_vars.count(rv))
        throw LocalVarCaptureError("binding captures instance local variable " + rv);
  }
  return pre;
}

}  // namespace chrconf
