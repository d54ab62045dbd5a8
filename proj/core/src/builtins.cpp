#include "chrconf/builtins.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace chrconf {

namespace {

bool contains_arith(const Term& t) {
  if (t.is_compound()) {
    if ((t.functor() == "+" || t.functor() == "-") && t.arity() == 2) return true;
    for (const Term& a : t.args())
      if (contains_arith(a)) return true;
  }
  return false;
}

// Linear combination: coefficient per variable plus a constant.
struct Lin {
  std::map<std::string, int> coef;
  std::int64_t c = 0;
  bool numeric = true;  // false when a non-integer leaf occurs

  void add_var(const std::string& v, int k) {
    coef[v] += k;
    if (coef[v] == 0) coef.erase(v);
  }
};

void linearize(const Term& t, int sign, Lin& out) {
  switch (t.kind()) {
    case TermKind::Int:
      out.c += sign * t.value();
      return;
    case TermKind::Var:
      out.add_var(t.name(), sign);
      return;
    case TermKind::Compound:
      if (t.functor() == "+" && t.arity() == 2) {
        linearize(t.args()[0], sign, out);
        linearize(t.args()[1], sign, out);
        return;
      }
      if (t.functor() == "-" && t.arity() == 2) {
        linearize(t.args()[0], sign, out);
        linearize(t.args()[1], -sign, out);
        return;
      }
      out.numeric = false;
      return;
    case TermKind::Const:
      out.numeric = false;
      return;
  }
}

// lhs - rhs as a linear form; the fragment allows at most one +1 and one -1
// coefficient.
std::optional<Lin> difference(const Term& lhs, const Term& rhs, std::string* why) {
  Lin lin;
  linearize(lhs, +1, lin);
  linearize(rhs, -1, lin);
  int pos = 0, neg = 0;
  for (const auto& [v, k] : lin.coef) {
    (void)v;
    if (k == 1)
      ++pos;
    else if (k == -1)
      ++neg;
    else {
      if (why) *why = "coefficient outside the difference-bound fragment";
      return std::nullopt;
    }
  }
  if (pos > 1 || neg > 1) {
    if (why) *why = "more than one variable per side";
    return std::nullopt;
  }
  return lin;
}

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct DbmProblem {
  std::vector<std::string> nodes;  // index 0 is the zero node ""
  std::map<std::string, int> index;
  std::vector<std::vector<std::int64_t>> d;

  DbmProblem() { node(""); }

  int node(const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    nodes.push_back(name);
    index[name] = id;
    for (auto& row : d) row.push_back(kInf);
    d.emplace_back(nodes.size(), kInf);
    d[id][id] = 0;
    return id;
  }

  void edge(const std::string& a, const std::string& b, std::int64_t c) {
    int i = node(a), j = node(b);
    d[i][j] = std::min(d[i][j], c);
  }

  bool close() {  // Floyd-Warshall; false on a negative cycle
    std::size_t n = nodes.size();
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        if (d[i][k] >= kInf) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (d[k][j] >= kInf) continue;
          d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        }
      }
    for (std::size_t i = 0; i < n; ++i)
      if (d[i][i] < 0) return false;
    return true;
  }
};

// Comparison folded to "pos - neg <= c" over the integers (strictness
// absorbed into the constant).
struct NormalizedCmp {
  std::optional<std::string> pos, neg;
  std::int64_t c;
};

enum class CmpResult { Bound, True, False, NonNumeric, OutOfFragment };

CmpResult normalize_comparison(const Term& atom, NormalizedCmp* out) {
  const std::string& f = atom.functor();
  Term lhs = atom.args()[0], rhs = atom.args()[1];
  bool strict;
  if (f == "=<") {
    strict = false;
  } else if (f == "<") {
    strict = true;
  } else if (f == ">=") {
    std::swap(lhs, rhs);
    strict = false;
  } else if (f == ">") {
    std::swap(lhs, rhs);
    strict = true;
  } else {
    return CmpResult::OutOfFragment;
  }
  std::string why;
  auto lin = difference(lhs, rhs, &why);
  if (!lin) return CmpResult::OutOfFragment;
  if (!lin->numeric) return CmpResult::NonNumeric;
  std::int64_t bound = -lin->c - (strict ? 1 : 0);
  NormalizedCmp cmp;
  cmp.c = bound;
  for (const auto& [v, k] : lin->coef) {
    if (k == 1)
      cmp.pos = v;
    else
      cmp.neg = v;
  }
  if (!cmp.pos && !cmp.neg) return 0 <= bound ? CmpResult::True : CmpResult::False;
  *out = cmp;
  return CmpResult::Bound;
}

Term bound_atom(const std::string& a, const std::string& b, std::int64_t c) {
  if (b.empty()) return Term::compound("=<", {Term::var(a), Term::integer(c)});
  if (a.empty()) return Term::compound(">=", {Term::var(b), Term::integer(-c)});
  return Term::compound("=<", {Term::compound("-", {Term::var(a), Term::var(b)}), Term::integer(c)});
}

}  // namespace

namespace builtins {

bool supported(const std::string& functor, std::size_t arity) {
  if (arity == 0) return functor == "true" || functor == "fail";
  if (arity != 2) return false;
  return functor == "=" || functor == "==" || functor == "<" || functor == "=<" ||
         functor == ">" || functor == ">=";
}

bool is_comparison(const std::string& functor) {
  return functor == "<" || functor == "=<" || functor == ">" || functor == ">=";
}

bool is_equality(const std::string& functor) { return functor == "=" || functor == "=="; }

bool validate_atom(const Term& atom, std::string* why) {
  if (atom.is_var() || atom.is_int()) {
    if (why) *why = "not a predicate atom";
    return false;
  }
  if (!supported(atom.functor(), atom.arity())) {
    if (why) *why = "predicate " + atom.functor() + "/" + std::to_string(atom.arity()) +
                    " is not in the supported vocabulary";
    return false;
  }
  if (atom.arity() == 0) return true;
  if (is_equality(atom.functor())) {
    if (contains_arith(atom.args()[0]) || contains_arith(atom.args()[1])) {
      if (why) *why = "arithmetic expressions are not allowed under equality";
      return false;
    }
    return true;
  }
  return difference(atom.args()[0], atom.args()[1], why).has_value();
}

std::optional<Term> negate_atom(const Term& atom) {
  if (!atom.is_compound() || atom.arity() != 2) return std::nullopt;
  const std::string& f = atom.functor();
  std::string neg;
  if (f == "<")
    neg = ">=";
  else if (f == "=<")
    neg = ">";
  else if (f == ">")
    neg = "=<";
  else if (f == ">=")
    neg = "<";
  else
    return std::nullopt;
  return Term::compound(neg, {atom.args()[0], atom.args()[1]});
}

}  // namespace builtins

BuiltinStore BuiltinStore::from_atoms(const std::vector<Term>& atoms) {
  BuiltinStore s;
  s.atoms_ = atoms;
  s.solve();
  return s;
}

BuiltinStore BuiltinStore::add(const Term& atom) const { return add_all({atom}); }

BuiltinStore BuiltinStore::add_all(const std::vector<Term>& atoms) const {
  BuiltinStore s;
  s.atoms_ = atoms_;
  for (const Term& a : atoms) {
    std::string why;
    if (!builtins::validate_atom(a, &why))
      throw UnsupportedBuiltinError(a.to_string() + ": " + why);
    s.atoms_.push_back(a);
  }
  s.solve();
  return s;
}

void BuiltinStore::solve() {
  eq_ = Subst();
  bounds_.clear();
  sat_ = true;

  std::vector<Term> comparisons;
  for (const Term& a : atoms_) {
    if (a.is_const() && a.name() == "true") continue;
    if (a.is_const() && a.name() == "fail") {
      sat_ = false;
      return;
    }
    if (!a.is_compound() || a.arity() != 2) {
      sat_ = false;  // malformed atoms are treated as unsatisfiable
      return;
    }
    if (builtins::is_equality(a.functor())) {
      if (!unify_extend(eq_, a.args()[0], a.args()[1])) {
        sat_ = false;
        return;
      }
    } else {
      comparisons.push_back(a);
    }
  }

  // Iterate: substitute, build the DBM, extract implied equalities, repeat.
  for (;;) {
    DbmProblem dbm;
    for (const Term& raw : comparisons) {
      Term a = eq_.apply(raw);
      NormalizedCmp cmp{};
      switch (normalize_comparison(a, &cmp)) {
        case CmpResult::True:
          break;
        case CmpResult::False:
        case CmpResult::NonNumeric:  // comparisons only hold over integers
        case CmpResult::OutOfFragment:
          sat_ = false;
          return;
        case CmpResult::Bound:
          dbm.edge(cmp.pos ? *cmp.pos : "", cmp.neg ? *cmp.neg : "", cmp.c);
          break;
      }
    }
    if (!dbm.close()) {
      sat_ = false;
      return;
    }
    bool changed = false;
    std::size_t n = dbm.nodes.size();
    for (std::size_t i = 0; i < n && !changed; ++i)
      for (std::size_t j = 0; j < n && !changed; ++j) {
        if (i == j || dbm.d[i][j] >= kInf || dbm.d[j][i] >= kInf) continue;
        if (dbm.d[i][j] + dbm.d[j][i] != 0) continue;
        bool ok = true;
        if (i == 0) {
          // 0 - x <= c and x - 0 <= -c pin x = -c.
          ok = unify_extend(eq_, Term::var(dbm.nodes[j]), Term::integer(-dbm.d[i][j]));
          changed = true;
        } else if (j == 0) {
          ok = unify_extend(eq_, Term::var(dbm.nodes[i]), Term::integer(dbm.d[i][j]));
          changed = true;
        } else if (dbm.d[i][j] == 0) {
          ok = unify_extend(eq_, Term::var(dbm.nodes[i]), Term::var(dbm.nodes[j]));
          changed = true;
        }
        if (!ok) {
          sat_ = false;
          return;
        }
      }
    if (changed) continue;

    // Canonical bounds: the full closure, self-edges omitted.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || dbm.d[i][j] >= kInf) continue;
        bounds_.push_back(Bound{dbm.nodes[i], dbm.nodes[j], dbm.d[i][j]});
      }
    std::sort(bounds_.begin(), bounds_.end());
    return;
  }
}

std::vector<Term> BuiltinStore::solved_atoms() const {
  std::vector<Term> out;
  if (!sat_) {
    out.push_back(Term::constant("fail"));
    return out;
  }
  for (const auto& [v, t] : eq_.bindings()) out.push_back(Term::compound("=", {Term::var(v), t}));
  for (const Bound& b : bounds_) out.push_back(bound_atom(b.a, b.b, b.c));
  return out;
}

std::set<std::string> BuiltinStore::comparison_vars() const {
  std::set<std::string> vs;
  for (const Bound& b : bounds_) {
    if (!b.a.empty()) vs.insert(b.a);
    if (!b.b.empty()) vs.insert(b.b);
  }
  return vs;
}

std::map<std::string, std::int64_t> BuiltinStore::integer_model() const {
  // Bellman-Ford from a virtual source with 0-edges to every node;
  // val(x) = dist(x) - dist(zero) satisfies every bound a - b <= c.
  std::map<std::string, std::int64_t> model;
  if (!sat_) return model;
  std::vector<std::string> names{""};
  for (const auto& v : comparison_vars()) names.push_back(v);
  std::map<std::string, std::int64_t> dist;
  for (const auto& n : names) dist[n] = 0;
  for (std::size_t pass = 0; pass <= names.size(); ++pass) {
    bool changed = false;
    for (const Bound& b : bounds_) {
      if (dist[b.b] + b.c < dist[b.a]) {
        dist[b.a] = dist[b.b] + b.c;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::int64_t zero = dist[""];
  for (const auto& n : names)
    if (!n.empty()) model[n] = dist[n] - zero;
  return model;
}

Trivalent BuiltinStore::entails(const std::set<std::string>& locals,
                                const std::vector<Term>& goal) const {
  if (!sat_) return Trivalent::Yes;  // vacuous: the store has no models

  bool not_entailed = false;
  bool goal_unsat = false;

  Subst theta = eq_;
  std::set<std::string> pre_domain;
  for (const auto& [v, t] : eq_.bindings()) {
    (void)t;
    pre_domain.insert(v);
  }

  std::vector<Term> goal_comparisons;
  for (const Term& raw : goal) {
    Term a = theta.apply(raw);
    if (a.is_const() && a.name() == "true") continue;
    if (a.is_const() && a.name() == "fail") {
      goal_unsat = true;
      continue;
    }
    if (!a.is_compound() || a.arity() != 2) return Trivalent::Unknown;
    if (builtins::is_equality(a.functor())) {
      if (!unify_extend(theta, a.args()[0], a.args()[1])) goal_unsat = true;
    } else if (builtins::is_comparison(a.functor())) {
      goal_comparisons.push_back(raw);
    } else {
      return Trivalent::Unknown;
    }
  }

  // New bindings of non-local variables are not entailed by the store.
  for (const auto& [v, t] : theta.bindings()) {
    (void)t;
    if (!pre_domain.count(v) && !locals.count(v)) not_entailed = true;
  }

  if (!goal_unsat && !goal_comparisons.empty()) {
    DbmProblem goal_dbm;
    for (const Term& raw : goal_comparisons) {
      Term a = theta.apply(raw);
      NormalizedCmp cmp{};
      switch (normalize_comparison(a, &cmp)) {
        case CmpResult::True:
          break;
        case CmpResult::False:
        case CmpResult::NonNumeric:
          goal_unsat = true;
          break;
        case CmpResult::OutOfFragment:
          return Trivalent::Unknown;
        case CmpResult::Bound:
          goal_dbm.edge(cmp.pos ? *cmp.pos : "", cmp.neg ? *cmp.neg : "", cmp.c);
          break;
      }
    }
    if (!goal_unsat) {
      if (!goal_dbm.close()) {
        goal_unsat = true;
      } else {
        // Project out the locals (closure makes dropping rows/columns exact),
        // then require every surviving bound to follow from the store.
        std::map<std::pair<std::string, std::string>, std::int64_t> store_d;
        for (const Bound& b : bounds_) store_d[{b.a, b.b}] = b.c;
        std::size_t n = goal_dbm.nodes.size();
        for (std::size_t i = 0; i < n; ++i) {
          if (locals.count(goal_dbm.nodes[i])) continue;
          for (std::size_t j = 0; j < n; ++j) {
            if (i == j || locals.count(goal_dbm.nodes[j])) continue;
            if (goal_dbm.d[i][j] >= kInf) continue;
            auto it = store_d.find({goal_dbm.nodes[i], goal_dbm.nodes[j]});
            if (it == store_d.end() || it->second > goal_dbm.d[i][j]) not_entailed = true;
          }
        }
      }
    }
  }

  if (!goal_unsat && !not_entailed) return Trivalent::Yes;

  // Not provably entailed; distinguish refutation (store /\ goal unsat).
  std::vector<Term> combined = atoms_;
  combined.insert(combined.end(), goal.begin(), goal.end());
  BuiltinStore both = BuiltinStore::from_atoms(combined);
  if (!both.satisfiable()) return Trivalent::No;
  return Trivalent::Unknown;
}

bool BuiltinStore::equivalent(const BuiltinStore& other, const Subst& renaming) const {
  BuiltinStore self = renamed(renaming);
  if (self.sat_ != other.sat_) return false;
  if (!self.sat_) return true;
  if (!(self.eq_ == other.eq_)) return false;
  return self.bounds_ == other.bounds_;
}

BuiltinStore BuiltinStore::renamed(const Subst& renaming) const {
  return BuiltinStore::from_atoms(renaming.apply(atoms_));
}

BuiltinStore BuiltinStore::renamed(const std::map<std::string, std::string>& renaming) const {
  return BuiltinStore::from_atoms(rename_vars(atoms_, renaming));
}

BuiltinStore BuiltinStore::projected(const std::set<std::string>& keep) const {
  if (!sat_) return *this;
  std::vector<Term> atoms;
  for (const Bound& b : bounds_) {
    if ((!b.a.empty() && !keep.count(b.a)) || (!b.b.empty() && !keep.count(b.b))) continue;
    atoms.push_back(bound_atom(b.a, b.b, b.c));
  }
  return BuiltinStore::from_atoms(atoms);
}

std::string BuiltinStore::to_string() const {
  if (!sat_) return "fail";
  std::vector<Term> atoms = solved_atoms();
  if (atoms.empty()) return "true";
  return chrconf::to_string(atoms, " & ");
}

}  // namespace chrconf
