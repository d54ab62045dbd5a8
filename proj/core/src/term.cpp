#include "chrconf/term.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

namespace chrconf {

struct Term::Node {
  std::string text;        // var/const name or compound functor
  std::int64_t value = 0;  // Int payload
  std::vector<Term> args;
};

namespace {
const std::vector<Term> kNoArgs;
}  // namespace

Term::Term() : kind_(TermKind::Const), node_(std::make_shared<Node>(Node{"true", 0, {}})) {}

Term::Term(TermKind k, std::shared_ptr<const Node> n) : kind_(k), node_(std::move(n)) {}

Term Term::var(std::string name) {
  return Term(TermKind::Var, std::make_shared<Node>(Node{std::move(name), 0, {}}));
}

Term Term::constant(std::string name) {
  return Term(TermKind::Const, std::make_shared<Node>(Node{std::move(name), 0, {}}));
}

Term Term::integer(std::int64_t value) {
  return Term(TermKind::Int, std::make_shared<Node>(Node{{}, value, {}}));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return constant(std::move(functor));
  return Term(TermKind::Compound, std::make_shared<Node>(Node{std::move(functor), 0, std::move(args)}));
}

Term Term::nil() { return constant("[]"); }

Term Term::cons(Term head, Term tail) {
  return compound(".", {std::move(head), std::move(tail)});
}

Term Term::list(const std::vector<Term>& items) { return list(items, nil()); }

Term Term::list(const std::vector<Term>& items, Term tail) {
  Term t = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) t = cons(*it, t);
  return t;
}

const std::string& Term::name() const { return node_->text; }

std::int64_t Term::value() const { return node_->value; }

const std::string& Term::functor() const { return node_->text; }

const std::vector<Term>& Term::args() const {
  return kind_ == TermKind::Compound ? node_->args : kNoArgs;
}

std::size_t Term::arity() const { return args().size(); }

bool Term::is_nil() const { return kind_ == TermKind::Const && node_->text == "[]"; }

bool Term::is_cons() const {
  return kind_ == TermKind::Compound && node_->text == "." && node_->args.size() == 2;
}

std::pair<std::vector<Term>, Term> Term::list_parts() const {
  std::vector<Term> items;
  Term t = *this;
  while (t.is_cons()) {
    items.push_back(t.args()[0]);
    t = t.args()[1];
  }
  return {std::move(items), std::move(t)};
}

bool Term::operator==(const Term& other) const { return compare(other) == 0; }

int Term::compare(const Term& other) const {
  if (node_ == other.node_ && kind_ == other.kind_) return 0;
  if (kind_ != other.kind_) return kind_ < other.kind_ ? -1 : 1;
  switch (kind_) {
    case TermKind::Var:
    case TermKind::Const:
      return node_->text.compare(other.node_->text);
    case TermKind::Int:
      if (node_->value != other.node_->value) return node_->value < other.node_->value ? -1 : 1;
      return 0;
    case TermKind::Compound: {
      if (int c = node_->text.compare(other.node_->text)) return c;
      if (node_->args.size() != other.node_->args.size())
        return node_->args.size() < other.node_->args.size() ? -1 : 1;
      for (std::size_t i = 0; i < node_->args.size(); ++i)
        if (int c = node_->args[i].compare(other.node_->args[i])) return c;
      return 0;
    }
  }
  return 0;
}

bool Term::ground() const {
  if (is_var()) return false;
  for (const Term& a : args())
    if (!a.ground()) return false;
  return true;
}

bool Term::contains_var(const std::string& var_name) const {
  if (is_var()) return node_->text == var_name;
  for (const Term& a : args())
    if (a.contains_var(var_name)) return true;
  return false;
}

void Term::collect_vars(std::vector<std::string>& out) const {
  if (is_var()) {
    for (const auto& v : out)
      if (v == node_->text) return;
    out.push_back(node_->text);
    return;
  }
  for (const Term& a : args()) a.collect_vars(out);
}

std::set<std::string> Term::var_set() const {
  std::vector<std::string> vs;
  collect_vars(vs);
  return {vs.begin(), vs.end()};
}

std::size_t Term::node_count() const {
  std::size_t n = 1;
  for (const Term& a : args()) n += a.node_count();
  return n;
}

namespace {

bool needs_quotes(const std::string& name) {
  if (name.empty()) return true;
  if (name == "[]" || name == "." || name == "true" || name == "fail") return false;
  if (!(std::islower(static_cast<unsigned char>(name[0])))) {
    // Operator-ish and quoted names print as-is; they are produced internally
    // (e.g. "'X'" variable names, "$f1" frozen constants) and never reparsed.
    return false;
  }
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return true;
  return false;
}

void print_term(const Term& t, std::ostringstream& os, bool skeleton) {
  switch (t.kind()) {
    case TermKind::Var:
      os << (skeleton ? std::string("_") : t.name());
      return;
    case TermKind::Int:
      os << t.value();
      return;
    case TermKind::Const:
      if (needs_quotes(t.name()))
        os << '\'' << t.name() << '\'';
      else
        os << t.name();
      return;
    case TermKind::Compound: {
      if (t.is_cons()) {
        auto [items, tail] = t.list_parts();
        os << '[';
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (i) os << ',';
          print_term(items[i], os, skeleton);
        }
        if (!tail.is_nil()) {
          os << '|';
          print_term(tail, os, skeleton);
        }
        os << ']';
        return;
      }
      static const std::set<std::string> infix = {"=", "==", "<", "=<", ">", ">=", "+", "-"};
      if (t.arity() == 2 && infix.count(t.functor())) {
        print_term(t.args()[0], os, skeleton);
        os << t.functor();
        print_term(t.args()[1], os, skeleton);
        return;
      }
      os << t.functor() << '(';
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        if (i) os << ',';
        print_term(t.args()[i], os, skeleton);
      }
      os << ')';
      return;
    }
  }
}

}  // namespace

std::string Term::to_string() const {
  std::ostringstream os;
  print_term(*this, os, false);
  return os.str();
}

std::string Term::skeleton() const {
  std::ostringstream os;
  print_term(*this, os, true);
  return os.str();
}

bool Subst::bound(const std::string& var_name) const { return bindings_.count(var_name) > 0; }

std::optional<Term> Subst::lookup(const std::string& var_name) const {
  auto it = bindings_.find(var_name);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

Term Subst::apply(const Term& t) const {
  if (bindings_.empty()) return t;
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = bindings_.find(t.name());
      return it == bindings_.end() ? t : it->second;  // idempotent: no re-application
    }
    case TermKind::Const:
    case TermKind::Int:
      return t;
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const Term& a : t.args()) {
        args.push_back(apply(a));
        changed = changed || !(args.back() == a);
      }
      return changed ? Term::compound(t.functor(), std::move(args)) : t;
    }
  }
  return t;
}

std::vector<Term> Subst::apply(const std::vector<Term>& ts) const {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const Term& t : ts) out.push_back(apply(t));
  return out;
}

bool Subst::compose_bind(const std::string& var_name, const Term& t) {
  Term norm = apply(t);
  if (auto existing = bindings_.find(var_name); existing != bindings_.end())
    return existing->second == norm;  // rebinding must agree
  if (norm.is_var() && norm.name() == var_name) return true;
  if (norm.contains_var(var_name)) return false;  // occurs-check
  Subst unit;
  unit.bindings_.emplace(var_name, norm);
  for (auto& [v, range] : bindings_) range = unit.apply(range);
  bindings_.emplace(var_name, std::move(norm));
  return true;
}

Subst Subst::compose(const Subst& first, const Subst& second) {
  Subst out;
  for (const auto& [v, t] : first.bindings_) {
    Term applied = second.apply(t);
    if (!(applied.is_var() && applied.name() == v)) out.bindings_.emplace(v, applied);
  }
  for (const auto& [v, t] : second.bindings_)
    if (!out.bindings_.count(v) && !first.bindings_.count(v)) out.bindings_.emplace(v, t);
  return out;
}

std::string Subst::to_string() const {
  std::ostringstream os;
  os << '{';
  bool sep = false;
  for (const auto& [v, t] : bindings_) {
    if (sep) os << ", ";
    os << v << " -> " << t.to_string();
    sep = true;
  }
  os << '}';
  return os.str();
}

bool unify_extend(Subst& sigma, const Term& t1, const Term& t2) {
  Term a = sigma.apply(t1);
  Term b = sigma.apply(t2);
  if (a == b) return true;
  if (a.is_var() && b.is_var()) {
    // Deterministic orientation (greater name bound to smaller) keeps solved
    // forms canonical regardless of equation order.
    if (a.name() < b.name()) return sigma.compose_bind(b.name(), a);
    return sigma.compose_bind(a.name(), b);
  }
  if (a.is_var()) return sigma.compose_bind(a.name(), b);
  if (b.is_var()) return sigma.compose_bind(b.name(), a);
  if (a.kind() != b.kind()) return false;
  if (a.is_const()) return a.name() == b.name();
  if (a.is_int()) return a.value() == b.value();
  if (a.functor() != b.functor() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (!unify_extend(sigma, a.args()[i], b.args()[i])) return false;
  return true;
}

std::optional<Subst> unify(const Term& t1, const Term& t2) {
  Subst sigma;
  if (!unify_extend(sigma, t1, t2)) return std::nullopt;
  return sigma;
}

bool match_extend(Subst& sigma, const Term& pattern, const Term& target) {
  // Assumes pattern and target have disjoint variables (rule instances are
  // renamed apart from stores); a pattern variable matching itself is a no-op.
  Term p = sigma.apply(pattern);
  if (p.is_var()) {
    if (target.is_var() && target.name() == p.name()) return true;
    return sigma.compose_bind(p.name(), target);
  }
  if (p.kind() != target.kind()) return false;
  switch (p.kind()) {
    case TermKind::Const:
      return p.name() == target.name();
    case TermKind::Int:
      return p.value() == target.value();
    case TermKind::Compound: {
      if (p.functor() != target.functor() || p.arity() != target.arity()) return false;
      for (std::size_t i = 0; i < p.arity(); ++i)
        if (!match_extend(sigma, p.args()[i], target.args()[i])) return false;
      return true;
    }
    default:
      return false;
  }
}

std::optional<Subst> match(const Term& pattern, const Term& target) {
  Subst sigma;
  if (!match_extend(sigma, pattern, target)) return std::nullopt;
  return sigma;
}

std::string fresh_var_name(const std::string& base) {
  static std::atomic<std::uint64_t> counter{0};
  std::string stem = base;
  if (auto pos = stem.find('#'); pos != std::string::npos) stem.resize(pos);
  if (stem.empty()) stem = "V";
  return stem + "#" + std::to_string(++counter);
}

Term rename_apart(const Term& t, const std::set<std::string>& avoid, Subst* renaming) {
  std::vector<Term> one{t};
  return rename_apart(one, avoid, renaming)[0];
}

std::vector<Term> rename_apart(const std::vector<Term>& ts, const std::set<std::string>& avoid,
                               Subst* renaming) {
  std::vector<std::string> vars;
  for (const Term& t : ts) t.collect_vars(vars);
  Subst map;
  for (const auto& v : vars) {
    std::string fresh = fresh_var_name(v);
    while (avoid.count(fresh)) fresh = fresh_var_name(v);
    map.compose_bind(v, Term::var(fresh));
  }
  if (renaming) *renaming = Subst::compose(*renaming, map);
  return map.apply(ts);
}

Term rename_vars(const Term& t, const std::map<std::string, std::string>& renaming) {
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = renaming.find(t.name());
      return it == renaming.end() ? t : Term::var(it->second);
    }
    case TermKind::Const:
    case TermKind::Int:
      return t;
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(rename_vars(a, renaming));
      return Term::compound(t.functor(), std::move(args));
    }
  }
  return t;
}

std::vector<Term> rename_vars(const std::vector<Term>& ts,
                              const std::map<std::string, std::string>& renaming) {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const Term& t : ts) out.push_back(rename_vars(t, renaming));
  return out;
}

std::string to_string(const std::vector<Term>& ts, const char* sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) os << sep;
    os << ts[i].to_string();
  }
  return os.str();
}

}  // namespace chrconf
