#include "chrconf/meta.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace chrconf {

// ---------------------------------------------------------------------------
// Ground representation
// ---------------------------------------------------------------------------
namespace meta {

Term name_of(const Term& object) {
  switch (object.kind()) {
    case TermKind::Var:
      return Term::constant("'" + object.name() + "'");
    case TermKind::Const:
    case TermKind::Int:
      return object;
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(object.args().size());
      for (const Term& a : object.args()) args.push_back(name_of(a));
      return Term::compound(object.functor(), std::move(args));
    }
  }
  return object;
}

Term lift(const Term& object, Subst& var_map) {
  switch (object.kind()) {
    case TermKind::Var: {
      if (auto bound = var_map.lookup(object.name())) return *bound;
      Term mv = Term::var(fresh_var_name(object.name()));
      var_map.compose_bind(object.name(), mv);
      return mv;
    }
    case TermKind::Const:
    case TermKind::Int:
      return object;
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(object.args().size());
      for (const Term& a : object.args()) args.push_back(lift(a, var_map));
      return Term::compound(object.functor(), std::move(args));
    }
  }
  return object;
}

std::vector<Term> lift(const std::vector<Term>& objects, Subst& var_map) {
  std::vector<Term> out;
  out.reserve(objects.size());
  for (const Term& t : objects) out.push_back(lift(t, var_map));
  return out;
}

bool is_var_name(const Term& t) {
  return t.is_const() && t.name().size() >= 3 && t.name().front() == '\'' &&
         t.name().back() == '\'';
}

Term drop(const Term& meta_term) {
  switch (meta_term.kind()) {
    case TermKind::Var:
      throw NonGroundMetaTermError("cannot drop non-ground meta term " + meta_term.to_string());
    case TermKind::Const:
      if (is_var_name(meta_term))
        return Term::var(meta_term.name().substr(1, meta_term.name().size() - 2));
      return meta_term;
    case TermKind::Int:
      return meta_term;
    case TermKind::Compound: {
      std::vector<Term> args;
      args.reserve(meta_term.args().size());
      for (const Term& a : meta_term.args()) args.push_back(drop(a));
      return Term::compound(meta_term.functor(), std::move(args));
    }
  }
  return meta_term;
}

}  // namespace meta

// ---------------------------------------------------------------------------
// StateTemplate
// ---------------------------------------------------------------------------
namespace {

// Splits a substituted rest term into atoms plus an optional new rest
// variable. 'true' and '[]' dissolve; a lone atom contributes itself.
void flatten_rest(const Term& value, std::vector<Term>& atoms, std::optional<std::string>& rest) {
  if (value.is_var()) {
    rest = value.name();
    return;
  }
  if (value.is_const() && (value.name() == "true" || value.name() == "[]")) return;
  if (value.is_cons() || value.is_nil()) {
    auto [items, tail] = value.list_parts();
    for (const Term& t : items) atoms.push_back(t);
    if (tail.is_var())
      rest = tail.name();
    else if (!tail.is_nil())
      atoms.push_back(tail);
    return;
  }
  atoms.push_back(value);
}

}  // namespace

StateTemplate StateTemplate::applied(const Subst& s) const {
  StateTemplate out;
  out.store = s.apply(store);
  out.builtins = s.apply(builtins);
  if (store_rest) {
    if (auto bound = s.lookup(*store_rest))
      flatten_rest(*bound, out.store, out.store_rest);
    else
      out.store_rest = store_rest;
  }
  if (builtin_rest) {
    if (auto bound = s.lookup(*builtin_rest))
      flatten_rest(*bound, out.builtins, out.builtin_rest);
    else
      out.builtin_rest = builtin_rest;
  }
  return out;
}

std::set<std::string> StateTemplate::var_set() const {
  std::set<std::string> vs;
  for (const Term& t : store)
    for (const auto& v : t.var_set()) vs.insert(v);
  for (const Term& t : builtins)
    for (const auto& v : t.var_set()) vs.insert(v);
  if (store_rest) vs.insert(*store_rest);
  if (builtin_rest) vs.insert(*builtin_rest);
  return vs;
}

std::string StateTemplate::to_string() const {
  std::ostringstream os;
  os << "<{" << chrconf::to_string(store);
  if (store_rest) os << (store.empty() ? "" : " ") << "| " << *store_rest;
  os << "} ; ";
  if (builtins.empty() && !builtin_rest) {
    os << "true";
  } else {
    os << chrconf::to_string(builtins, " & ");
    if (builtin_rest) os << (builtins.empty() ? "" : " & ") << *builtin_rest;
  }
  os << ">";
  return os.str();
}

bool StateTemplate::operator==(const StateTemplate& o) const {
  return store == o.store && store_rest == o.store_rest && builtins == o.builtins &&
         builtin_rest == o.builtin_rest;
}

// ---------------------------------------------------------------------------
// MetaConstraint
// ---------------------------------------------------------------------------
bool ModalData::operator==(const ModalData& o) const {
  return succeed == o.succeed && hyp == o.hyp && hyp_rest == o.hyp_rest && locals == o.locals &&
         concl == o.concl && concl_rest == o.concl_rest;
}

MetaConstraint MetaConstraint::eq(Term lhs, Term rhs) {
  MetaConstraint c;
  c.kind = Kind::Eq;
  c.eq_lhs = std::move(lhs);
  c.eq_rhs = std::move(rhs);
  return c;
}

MetaConstraint MetaConstraint::type_of(std::string type_name, Term subject) {
  MetaConstraint c;
  c.kind = Kind::TypeOf;
  c.type_name = std::move(type_name);
  c.subject = std::move(subject);
  return c;
}

MetaConstraint MetaConstraint::modal_succeed(std::vector<Term> concl,
                                             std::optional<std::string> concl_rest) {
  MetaConstraint c;
  c.kind = Kind::Modal;
  c.modal.succeed = true;
  c.modal.concl = std::move(concl);
  c.modal.concl_rest = std::move(concl_rest);
  return c;
}

MetaConstraint MetaConstraint::modal_implies(std::vector<Term> hyp,
                                             std::optional<std::string> hyp_rest,
                                             std::vector<std::string> locals,
                                             std::vector<Term> concl) {
  MetaConstraint c;
  c.kind = Kind::Modal;
  c.modal.succeed = true;
  c.modal.hyp = std::move(hyp);
  c.modal.hyp_rest = std::move(hyp_rest);
  c.modal.locals = std::move(locals);
  c.modal.concl = std::move(concl);
  return c;
}

MetaConstraint MetaConstraint::modal_fail(std::vector<Term> hyp,
                                          std::optional<std::string> hyp_rest,
                                          std::vector<Term> concl) {
  MetaConstraint c;
  c.kind = Kind::Modal;
  c.modal.succeed = false;
  c.modal.hyp = std::move(hyp);
  c.modal.hyp_rest = std::move(hyp_rest);
  c.modal.concl = std::move(concl);
  return c;
}

MetaConstraint MetaConstraint::inv(StateTemplate st) {
  MetaConstraint c;
  c.kind = Kind::Inv;
  c.inv_state = std::move(st);
  return c;
}

MetaConstraint MetaConstraint::equiv(StateTemplate left, StateTemplate right) {
  MetaConstraint c;
  c.kind = Kind::Equiv;
  c.equiv_left = std::move(left);
  c.equiv_right = std::move(right);
  return c;
}

MetaConstraint MetaConstraint::equiv_var(StateTemplate left, std::string state_var) {
  MetaConstraint c;
  c.kind = Kind::Equiv;
  c.equiv_left = std::move(left);
  c.state_var = std::move(state_var);
  return c;
}

MetaConstraint MetaConstraint::fresh(std::vector<std::string> vars) {
  MetaConstraint c;
  c.kind = Kind::FreshVars;
  c.fresh_vars = std::move(vars);
  return c;
}

MetaConstraint MetaConstraint::perm(Term lhs, Term rhs) {
  MetaConstraint c;
  c.kind = Kind::Perm;
  c.perm_lhs = std::move(lhs);
  c.perm_rhs = std::move(rhs);
  return c;
}

namespace {

std::vector<Term> applied_atoms(const std::vector<Term>& atoms, const Subst& s,
                                std::optional<std::string>& rest) {
  // Atom list with an optional glued rest variable: flatten substitutions of
  // the rest into the list.
  std::vector<Term> out = s.apply(atoms);
  if (rest) {
    std::optional<std::string> new_rest;
    std::vector<Term> extra;
    if (auto bound = s.lookup(*rest)) {
      flatten_rest(*bound, extra, new_rest);
      rest = new_rest;
      for (const Term& t : extra) out.push_back(t);
    }
  }
  return out;
}

}  // namespace

MetaConstraint MetaConstraint::applied(const Subst& s) const {
  MetaConstraint c = *this;
  switch (kind) {
    case Kind::Eq:
      c.eq_lhs = s.apply(eq_lhs);
      c.eq_rhs = s.apply(eq_rhs);
      break;
    case Kind::TypeOf:
      c.subject = s.apply(subject);
      break;
    case Kind::Modal: {
      c.modal.hyp_rest = modal.hyp_rest;
      c.modal.hyp = applied_atoms(modal.hyp, s, c.modal.hyp_rest);
      c.modal.concl_rest = modal.concl_rest;
      c.modal.concl = applied_atoms(modal.concl, s, c.modal.concl_rest);
      // Locals renamed by variable-to-variable bindings only.
      for (auto& l : c.modal.locals) {
        if (auto bound = s.lookup(l); bound && bound->is_var()) l = bound->name();
      }
      break;
    }
    case Kind::Inv:
      c.inv_state = inv_state.applied(s);
      break;
    case Kind::Equiv:
      c.equiv_left = equiv_left.applied(s);
      if (state_var.empty()) c.equiv_right = equiv_right.applied(s);
      break;
    case Kind::FreshVars:
      for (auto& l : c.fresh_vars) {
        if (auto bound = s.lookup(l); bound && bound->is_var()) l = bound->name();
      }
      break;
    case Kind::Perm:
      c.perm_lhs = s.apply(perm_lhs);
      c.perm_rhs = s.apply(perm_rhs);
      break;
  }
  return c;
}

bool MetaConstraint::operator==(const MetaConstraint& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Eq:
      return eq_lhs == o.eq_lhs && eq_rhs == o.eq_rhs;
    case Kind::TypeOf:
      return type_name == o.type_name && subject == o.subject;
    case Kind::Modal:
      return modal == o.modal;
    case Kind::Inv:
      return inv_state == o.inv_state;
    case Kind::Equiv:
      return equiv_left == o.equiv_left && state_var == o.state_var &&
             (!state_var.empty() || equiv_right == o.equiv_right);
    case Kind::FreshVars:
      return fresh_vars == o.fresh_vars;
    case Kind::Perm:
      return perm_lhs == o.perm_lhs && perm_rhs == o.perm_rhs;
  }
  return false;
}

std::string MetaConstraint::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Eq:
      os << eq_lhs.to_string() << " = " << eq_rhs.to_string();
      break;
    case Kind::TypeOf:
      os << "type(" << type_name << "," << subject.to_string() << ")";
      break;
    case Kind::Modal: {
      os << (modal.succeed ? "|=" : "=|") << " ";
      bool has_hyp = !modal.hyp.empty() || modal.hyp_rest;
      if (has_hyp) {
        os << "(" << chrconf::to_string(modal.hyp, " & ");
        if (modal.hyp_rest) os << (modal.hyp.empty() ? "" : " & ") << *modal.hyp_rest;
        os << " -> ";
      }
      if (!modal.locals.empty()) {
        os << "exists ";
        for (std::size_t i = 0; i < modal.locals.size(); ++i)
          os << (i ? "," : "") << modal.locals[i];
        os << ". ";
      }
      if (modal.concl.empty() && !modal.concl_rest) os << "true";
      os << chrconf::to_string(modal.concl, " & ");
      if (modal.concl_rest) os << (modal.concl.empty() ? "" : " & ") << *modal.concl_rest;
      if (has_hyp) os << ")";
      break;
    }
    case Kind::Inv:
      os << "inv(" << inv_state.to_string() << ")";
      break;
    case Kind::Equiv:
      os << "equiv(" << equiv_left.to_string() << ","
         << (state_var.empty() ? equiv_right.to_string() : state_var) << ")";
      break;
    case Kind::FreshVars:
      os << "freshVars([";
      for (std::size_t i = 0; i < fresh_vars.size(); ++i) os << (i ? "," : "") << fresh_vars[i];
      os << "])";
      break;
    case Kind::Perm:
      os << "perm(" << perm_lhs.to_string() << "," << perm_rhs.to_string() << ")";
      break;
  }
  return os.str();
}

std::string MetaState::to_string() const {
  std::ostringstream os;
  os << st.to_string();
  if (!where.empty()) {
    os << " WHERE ";
    for (std::size_t i = 0; i < where.size(); ++i) os << (i ? " & " : "") << where[i].to_string();
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------
TypeExpr TypeExpr::base(Kind k) {
  TypeExpr t;
  t.kind = k;
  return t;
}

TypeExpr TypeExpr::named(std::string name) {
  TypeExpr t;
  t.kind = Kind::Named;
  t.name = std::move(name);
  return t;
}

TypeExpr TypeExpr::list_of(TypeExpr elem) {
  TypeExpr t;
  t.kind = Kind::ListOf;
  t.element = std::make_shared<TypeExpr>(std::move(elem));
  return t;
}

TypeExpr TypeExpr::constraints_of(std::string functor, std::vector<TypeExpr> args) {
  TypeExpr t;
  t.kind = Kind::ConstraintsOf;
  t.pattern_functor = std::move(functor);
  t.pattern_args = std::move(args);
  return t;
}

std::string TypeExpr::to_string() const {
  switch (kind) {
    case Kind::VarName:
      return "var";
    case Kind::ConstName:
      return "const";
    case Kind::IntName:
      return "int";
    case Kind::Named:
      return name;
    case Kind::ListOf:
      return "list(" + element->to_string() + ")";
    case Kind::ConstraintsOf: {
      std::string s = "constraints(" + pattern_functor;
      if (!pattern_args.empty()) {
        s += "(";
        for (std::size_t i = 0; i < pattern_args.size(); ++i)
          s += (i ? "," : "") + pattern_args[i].to_string();
        s += ")";
      }
      return s + ")";
    }
  }
  return "?";
}

TypeTable::TypeTable() = default;

void TypeTable::declare(const std::string& name, TypeExpr def) { defs_[name] = std::move(def); }

bool TypeTable::declared(const std::string& name) const {
  return name == "var" || name == "const" || name == "int" || defs_.count(name) > 0;
}

const TypeExpr& TypeTable::resolve(const std::string& name) const {
  static const TypeExpr kVar = TypeExpr::base(TypeExpr::Kind::VarName);
  static const TypeExpr kConst = TypeExpr::base(TypeExpr::Kind::ConstName);
  static const TypeExpr kInt = TypeExpr::base(TypeExpr::Kind::IntName);
  if (name == "var") return kVar;
  if (name == "const") return kConst;
  if (name == "int") return kInt;
  auto it = defs_.find(name);
  if (it == defs_.end()) throw std::runtime_error("undeclared type: " + name);
  return it->second;
}

namespace {

Trivalent tri_and(Trivalent a, Trivalent b) {
  if (a == Trivalent::No || b == Trivalent::No) return Trivalent::No;
  if (a == Trivalent::Unknown || b == Trivalent::Unknown) return Trivalent::Unknown;
  return Trivalent::Yes;
}

// Possible top-level shapes of a type's members, for disjointness checks.
enum Shape : unsigned { kShapeVarName = 1, kShapeConst = 2, kShapeInt = 4, kShapeNil = 8, kShapeCons = 16 };

}  // namespace

Trivalent TypeTable::member(const Term& t, const std::string& type_name,
                            const std::map<std::string, std::string>& var_types) const {
  return member(t, resolve(type_name), var_types);
}

static unsigned type_shapes(const TypeTable& table, const TypeExpr& ty) {
  switch (ty.kind) {
    case TypeExpr::Kind::VarName:
      return kShapeVarName;
    case TypeExpr::Kind::ConstName:
      return kShapeConst | kShapeNil;
    case TypeExpr::Kind::IntName:
      return kShapeInt;
    case TypeExpr::Kind::ListOf:
    case TypeExpr::Kind::ConstraintsOf:
      return kShapeNil | kShapeCons;
    case TypeExpr::Kind::Named:
      return type_shapes(table, table.resolve(ty.name));
  }
  return 0;
}

Trivalent TypeTable::member(const Term& t, const TypeExpr& ty,
                            const std::map<std::string, std::string>& var_types) const {
  if (ty.kind == TypeExpr::Kind::Named) return member(t, resolve(ty.name), var_types);
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = var_types.find(t.name());
      if (it == var_types.end()) return Trivalent::Unknown;
      const TypeExpr& declared = resolve(it->second);
      if (declared.to_string() == ty.to_string()) return Trivalent::Yes;
      if ((type_shapes(*this, declared) & type_shapes(*this, ty)) == 0) return Trivalent::No;
      return Trivalent::Unknown;
    }
    case TermKind::Int:
      return ty.kind == TypeExpr::Kind::IntName ? Trivalent::Yes : Trivalent::No;
    case TermKind::Const: {
      bool varname = meta::is_var_name(t);
      switch (ty.kind) {
        case TypeExpr::Kind::VarName:
          return varname ? Trivalent::Yes : Trivalent::No;
        case TypeExpr::Kind::ConstName:
          return varname ? Trivalent::No : Trivalent::Yes;
        case TypeExpr::Kind::ListOf:
        case TypeExpr::Kind::ConstraintsOf:
          return t.is_nil() ? Trivalent::Yes : Trivalent::No;
        default:
          return Trivalent::No;
      }
    }
    case TermKind::Compound: {
      if (ty.kind == TypeExpr::Kind::ListOf) {
        if (!t.is_cons()) return Trivalent::No;
        return tri_and(member(t.args()[0], *ty.element, var_types),
                       member(t.args()[1], ty, var_types));
      }
      if (ty.kind == TypeExpr::Kind::ConstraintsOf) {
        if (!t.is_cons()) return Trivalent::No;
        const Term& atom = t.args()[0];
        Trivalent head;
        if (atom.is_var()) {
          head = Trivalent::Unknown;
        } else if (ty.pattern_args.empty()) {
          head = (atom.is_const() && atom.name() == ty.pattern_functor) ? Trivalent::Yes
                                                                        : Trivalent::No;
        } else if (!atom.is_compound() || atom.functor() != ty.pattern_functor ||
                   atom.arity() != ty.pattern_args.size()) {
          head = Trivalent::No;
        } else {
          head = Trivalent::Yes;
          for (std::size_t i = 0; i < ty.pattern_args.size(); ++i)
            head = tri_and(head, member(atom.args()[i], ty.pattern_args[i], var_types));
        }
        return tri_and(head, member(t.args()[1], ty, var_types));
      }
      return Trivalent::No;
    }
  }
  return Trivalent::Unknown;
}

bool TypeTable::names_ground(const std::string& type_name) const {
  return names_ground(resolve(type_name));
}

bool TypeTable::names_ground(const TypeExpr& ty) const {
  switch (ty.kind) {
    case TypeExpr::Kind::VarName:
      return false;
    case TypeExpr::Kind::ConstName:
    case TypeExpr::Kind::IntName:
      return true;
    case TypeExpr::Kind::ListOf:
      return names_ground(*ty.element);
    case TypeExpr::Kind::ConstraintsOf:
      for (const TypeExpr& a : ty.pattern_args)
        if (!names_ground(a)) return false;
      return true;
    case TypeExpr::Kind::Named:
      return names_ground(resolve(ty.name));
  }
  return false;
}

}  // namespace chrconf

namespace chrconf {

// ---------------------------------------------------------------------------
// Template matching
// ---------------------------------------------------------------------------
namespace {

// Simplifies a modal constraint; nullopt when it is trivially true.
std::optional<MetaConstraint> simplify_modal(MetaConstraint c) {
  auto strip_true = [](std::vector<Term>& atoms) {
    atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                               [](const Term& t) { return t.is_const() && t.name() == "true"; }),
                atoms.end());
  };
  strip_true(c.modal.hyp);
  strip_true(c.modal.concl);
  if (c.modal.concl.empty() && !c.modal.concl_rest && c.modal.succeed) return std::nullopt;
  if (c.modal.hyp.empty() && !c.modal.hyp_rest) c.modal.locals.clear();
  return c;
}

// All ways to match a template state onto a target state. Bindings go to
// template variables; when bind_target_rest is set (solving mode) unmatched
// template atoms may be pushed into the target's rest variable, and target
// rest variables may be forced empty.
void match_atoms_rec(const std::vector<Term>& pattern, std::size_t k,
                     const std::vector<Term>& target, std::vector<bool>& used,
                     std::vector<Term>& deferred, bool may_defer, const Subst& theta,
                     const std::function<void(const Subst&, const std::vector<Term>&,
                                              const std::vector<bool>&)>& done) {
  if (k == pattern.size()) {
    done(theta, deferred, used);
    return;
  }
  for (std::size_t p = 0; p < target.size(); ++p) {
    if (used[p]) continue;
    Subst ext = theta;
    if (!match_extend(ext, pattern[k], target[p])) continue;
    used[p] = true;
    match_atoms_rec(pattern, k + 1, target, used, deferred, may_defer, ext, done);
    used[p] = false;
  }
  if (may_defer) {
    deferred.push_back(pattern[k]);
    match_atoms_rec(pattern, k + 1, target, used, deferred, may_defer, theta, done);
    deferred.pop_back();
  }
}

std::vector<Subst> match_state_template(const StateTemplate& templ, const StateTemplate& target,
                                        const Subst& theta0, bool bind_target_rest) {
  std::vector<Subst> results;
  bool may_defer_store = bind_target_rest && target.store_rest.has_value();

  std::vector<bool> used_store(target.store.size(), false);
  std::vector<Term> deferred_store;
  match_atoms_rec(
      templ.store, 0, target.store, used_store, deferred_store, may_defer_store, theta0,
      [&](const Subst& theta1, const std::vector<Term>& deferred,
          const std::vector<bool>& used1) {
        Subst theta = theta1;
        // Unmatched template atoms go into the target's rest variable.
        std::optional<std::string> tgt_rest = target.store_rest;
        if (!deferred.empty()) {
          std::string fresh = fresh_var_name("S");
          if (!theta.compose_bind(*target.store_rest,
                                  Term::list(theta.apply(deferred), Term::var(fresh))))
            return;
          tgt_rest = fresh;
        }
        // Leftover target atoms (plus rest) must be absorbed by the template's
        // rest variable, or there must be none.
        std::vector<Term> leftover;
        for (std::size_t p = 0; p < target.store.size(); ++p)
          if (!used1[p]) leftover.push_back(target.store[p]);
        if (templ.store_rest) {
          Term tail = tgt_rest ? Term::var(*tgt_rest) : Term::nil();
          if (!theta.compose_bind(*templ.store_rest, Term::list(leftover, tail))) return;
        } else {
          if (!leftover.empty()) return;
          if (tgt_rest) {
            if (!bind_target_rest) return;
            if (!theta.compose_bind(*tgt_rest, Term::nil())) return;
          }
        }

        // Built-ins, same scheme.
        std::vector<bool> used_b(target.builtins.size(), false);
        std::vector<Term> deferred_b;
        bool may_defer_b = bind_target_rest && target.builtin_rest.has_value();
        match_atoms_rec(
            templ.builtins, 0, target.builtins, used_b, deferred_b, may_defer_b, theta,
            [&](const Subst& theta2, const std::vector<Term>& deferred2,
                const std::vector<bool>& used2) {
              Subst th = theta2;
              std::optional<std::string> tgt_brest = target.builtin_rest;
              if (!deferred2.empty()) {
                std::string fresh = fresh_var_name("B");
                if (!th.compose_bind(*target.builtin_rest,
                                     Term::list(th.apply(deferred2), Term::var(fresh))))
                  return;
                tgt_brest = fresh;
              }
              std::vector<Term> leftb;
              for (std::size_t p = 0; p < target.builtins.size(); ++p)
                if (!used2[p]) leftb.push_back(target.builtins[p]);
              if (templ.builtin_rest) {
                Term tail = tgt_brest ? Term::var(*tgt_brest) : Term::nil();
                if (!th.compose_bind(*templ.builtin_rest, Term::list(leftb, tail))) return;
              } else {
                if (!leftb.empty()) return;
                if (tgt_brest) {
                  if (!bind_target_rest) return;
                  if (!th.compose_bind(*tgt_brest, Term::constant("true"))) return;
                }
              }
              results.push_back(th);
            });
      });
  return results;
}

// Template states and constraints renamed apart so template variables never
// collide with state variables.
template <typename T>
T rename_template_piece(const T& piece, Subst& renaming);

template <>
StateTemplate rename_template_piece(const StateTemplate& st, Subst& renaming) {
  StateTemplate out;
  for (const Term& a : st.store) out.store.push_back(renaming.apply(a));
  for (const Term& a : st.builtins) out.builtins.push_back(renaming.apply(a));
  out.store_rest = st.store_rest;
  out.builtin_rest = st.builtin_rest;
  if (st.store_rest) {
    Term v = renaming.apply(Term::var(*st.store_rest));
    out.store_rest = v.is_var() ? v.name() : *st.store_rest;
  }
  if (st.builtin_rest) {
    Term v = renaming.apply(Term::var(*st.builtin_rest));
    out.builtin_rest = v.is_var() ? v.name() : *st.builtin_rest;
  }
  return out;
}

Subst template_renaming(const std::set<std::string>& vars) {
  Subst renaming;
  for (const auto& v : vars) renaming.compose_bind(v, Term::var(fresh_var_name(v)));
  return renaming;
}

std::set<std::string> template_vars(const StateTemplate& st,
                                    const std::vector<MetaConstraint>& where) {
  std::set<std::string> vs = st.var_set();
  for (const MetaConstraint& c : where) {
    switch (c.kind) {
      case MetaConstraint::Kind::TypeOf:
        for (const auto& v : c.subject.var_set()) vs.insert(v);
        break;
      case MetaConstraint::Kind::Perm:
        for (const auto& v : c.perm_lhs.var_set()) vs.insert(v);
        for (const auto& v : c.perm_rhs.var_set()) vs.insert(v);
        break;
      case MetaConstraint::Kind::Eq:
        for (const auto& v : c.eq_lhs.var_set()) vs.insert(v);
        for (const auto& v : c.eq_rhs.var_set()) vs.insert(v);
        break;
      case MetaConstraint::Kind::Modal:
        for (const Term& t : c.modal.hyp)
          for (const auto& v : t.var_set()) vs.insert(v);
        for (const Term& t : c.modal.concl)
          for (const auto& v : t.var_set()) vs.insert(v);
        break;
      default:
        break;
    }
  }
  return vs;
}

}  // namespace

// ---------------------------------------------------------------------------
// MetaEngine
// ---------------------------------------------------------------------------
MetaEngine::MetaEngine(const TypeTable& types, const InvariantSpec* inv, const EquivSpec* eq)
    : types_(&types), inv_(inv && !inv->empty() ? inv : nullptr),
      eq_(eq && !eq->empty() ? eq : nullptr) {}

namespace {

struct Norm {
  bool inconsistent = false;
  std::string reason;
  Subst eqsol;
  std::map<std::string, std::string> var_types;
  std::vector<std::pair<std::string, std::string>> extra_types;
  std::vector<MetaConstraint> modals;
  std::vector<MetaConstraint> perms;
  std::vector<std::vector<std::string>> fresh_sets;
  std::vector<MetaConstraint> others;  // Inv / Equiv conjuncts kept as-is
  std::vector<Term> hyp_atoms;
  BuiltinStore hyp;
};

bool var_excludes_int(const TypeTable& types, const std::map<std::string, std::string>& var_types,
                      const std::string& v) {
  auto it = var_types.find(v);
  if (it == var_types.end()) return false;
  return (type_shapes(types, types.resolve(it->second)) & kShapeInt) == 0;
}

bool all_vars_int_typed(const TypeTable& types,
                        const std::map<std::string, std::string>& var_types, const Term& t) {
  for (const auto& v : t.var_set()) {
    auto it = var_types.find(v);
    if (it == var_types.end()) return false;
    if (types.resolve(it->second).kind != TypeExpr::Kind::IntName) return false;
  }
  return true;
}

// Structural decomposition of a type constraint over a non-variable subject
// into constraints on embedded variables. Returns false on a provable
// violation; leaves undecomposable pieces in out (head patterns behind a
// variable, named types on opaque terms).
bool decompose_typeof(const TypeTable& types, const std::string& type_name, const Term& subject,
                      std::vector<std::pair<std::string, Term>>& var_leaves,
                      std::vector<MetaConstraint>& opaque) {
  const TypeExpr& ty = types.resolve(type_name);
  if (subject.is_var()) {
    var_leaves.emplace_back(type_name, subject);
    return true;
  }
  switch (ty.kind) {
    case TypeExpr::Kind::Named:
      return decompose_typeof(types, ty.name, subject, var_leaves, opaque);
    case TypeExpr::Kind::VarName:
    case TypeExpr::Kind::ConstName:
    case TypeExpr::Kind::IntName:
      return types.member(subject, ty, {}) == Trivalent::Yes;
    case TypeExpr::Kind::ListOf: {
      if (subject.is_nil()) return true;
      if (!subject.is_cons()) return false;
      // Element types may themselves be named; route through a synthetic name
      // only when needed.
      const TypeExpr& elem = *ty.element;
      if (elem.kind == TypeExpr::Kind::Named) {
        if (!decompose_typeof(types, elem.name, subject.args()[0], var_leaves, opaque))
          return false;
      } else if (subject.args()[0].is_var()) {
        std::string elem_name = elem.to_string();
        if (types.declared(elem_name))
          var_leaves.emplace_back(elem_name, subject.args()[0]);
        else
          opaque.push_back(MetaConstraint::type_of(type_name, subject));
      } else if (types.member(subject.args()[0], elem, {}) == Trivalent::No) {
        return false;
      } else if (types.member(subject.args()[0], elem, {}) == Trivalent::Unknown) {
        opaque.push_back(MetaConstraint::type_of(type_name, subject));
      }
      return decompose_typeof(types, type_name, subject.args()[1], var_leaves, opaque);
    }
    case TypeExpr::Kind::ConstraintsOf: {
      if (subject.is_nil()) return true;
      if (!subject.is_cons()) return false;
      const Term& atom = subject.args()[0];
      if (atom.is_var()) {
        opaque.push_back(MetaConstraint::type_of(type_name, subject));
      } else if (ty.pattern_args.empty()) {
        if (!atom.is_const() || atom.name() != ty.pattern_functor) return false;
      } else if (!atom.is_compound() || atom.functor() != ty.pattern_functor ||
                 atom.arity() != ty.pattern_args.size()) {
        return false;
      } else {
        for (std::size_t i = 0; i < ty.pattern_args.size(); ++i) {
          const TypeExpr& at = ty.pattern_args[i];
          std::string at_name = at.to_string();
          if (at.kind == TypeExpr::Kind::Named) at_name = at.name;
          if (atom.args()[i].is_var() && types.declared(at_name)) {
            var_leaves.emplace_back(at_name, atom.args()[i]);
          } else if (!atom.args()[i].is_var()) {
            if (types.member(atom.args()[i], at, {}) == Trivalent::No) return false;
          } else {
            opaque.push_back(MetaConstraint::type_of(type_name, subject));
          }
        }
      }
      return decompose_typeof(types, type_name, subject.args()[1], var_leaves, opaque);
    }
  }
  return false;
}

Norm normalize_where(const TypeTable& types, const std::vector<MetaConstraint>& M) {
  Norm m;
  // Equality conjuncts first.
  for (const MetaConstraint& c : M) {
    if (c.kind != MetaConstraint::Kind::Eq) continue;
    if (!unify_extend(m.eqsol, c.eq_lhs, c.eq_rhs)) {
      m.inconsistent = true;
      m.reason = "unsolvable equality " + c.to_string();
      return m;
    }
  }
  for (const MetaConstraint& raw : M) {
    MetaConstraint c = raw.applied(m.eqsol);
    switch (c.kind) {
      case MetaConstraint::Kind::Eq:
        break;
      case MetaConstraint::Kind::TypeOf: {
        if (!types.declared(c.type_name)) {
          m.inconsistent = true;
          m.reason = "undeclared type " + c.type_name;
          return m;
        }
        std::vector<std::pair<std::string, Term>> leaves;
        std::vector<MetaConstraint> opaque;
        if (!decompose_typeof(types, c.type_name, c.subject, leaves, opaque)) {
          m.inconsistent = true;
          m.reason = "type violation " + c.to_string();
          return m;
        }
        for (const auto& [ty_name, var] : leaves) {
          auto [it, fresh] = m.var_types.emplace(var.name(), ty_name);
          if (!fresh && it->second != ty_name) m.extra_types.emplace_back(var.name(), ty_name);
        }
        for (MetaConstraint& o : opaque) m.others.push_back(std::move(o));
        break;
      }
      case MetaConstraint::Kind::Modal:
        if (auto simplified = simplify_modal(c)) m.modals.push_back(*simplified);
        break;
      case MetaConstraint::Kind::Perm:
        m.perms.push_back(c);
        break;
      case MetaConstraint::Kind::FreshVars:
        m.fresh_sets.push_back(c.fresh_vars);
        break;
      case MetaConstraint::Kind::Inv:
      case MetaConstraint::Kind::Equiv:
        m.others.push_back(c);
        break;
    }
  }
  // Duplicate declarations must not be provably disjoint.
  for (const auto& [v, ty] : m.extra_types) {
    Trivalent r = types.member(Term::var(v), ty, m.var_types);
    if (r == Trivalent::No) {
      m.inconsistent = true;
      m.reason = "conflicting types for " + v;
      return m;
    }
  }

  // Hypothesis store from plain modal constraints.
  for (const MetaConstraint& c : m.modals) {
    if (!c.modal.hyp.empty() || c.modal.hyp_rest) continue;
    if (c.modal.succeed) {
      for (const Term& atom : c.modal.concl) {
        if (atom.is_var() || atom.is_int()) continue;
        if (!builtins::supported(atom.functor(), atom.arity())) continue;
        if (builtins::is_comparison(atom.functor())) {
          // A comparison over a provably non-integer variable is false for
          // every grounding.
          for (const auto& v : atom.var_set())
            if (var_excludes_int(types, m.var_types, v)) {
              m.inconsistent = true;
              m.reason = "comparison over non-integer variable in " + c.to_string();
              return m;
            }
        }
        m.hyp_atoms.push_back(atom);
      }
    } else if (c.modal.concl.size() == 1 && !c.modal.concl_rest) {
      const Term& atom = c.modal.concl[0];
      if (auto neg = builtins::negate_atom(atom)) {
        // Only import the negation when the comparison is forced over ints.
        if (all_vars_int_typed(types, m.var_types, atom)) m.hyp_atoms.push_back(*neg);
      }
    }
  }
  m.hyp = BuiltinStore::from_atoms(m.hyp_atoms);
  if (m.hyp.failed()) {
    m.inconsistent = true;
    m.reason = "modal constraints unsatisfiable";
    return m;
  }
  // Structural |=F and =|F contradiction (covers non-comparison formulas).
  for (const MetaConstraint& a : m.modals)
    for (const MetaConstraint& b : m.modals) {
      if (a.modal.succeed && !b.modal.succeed && a.modal.hyp == b.modal.hyp &&
          a.modal.hyp_rest == b.modal.hyp_rest && a.modal.concl == b.modal.concl &&
          a.modal.concl_rest == b.modal.concl_rest) {
        m.inconsistent = true;
        m.reason = "modal contradiction on " + a.to_string();
        return m;
      }
    }
  return m;
}

bool perm_derivable(const Norm& m, const Term& lhs, const Term& rhs) {
  auto [items1, tail1] = lhs.list_parts();
  auto [items2, tail2] = rhs.list_parts();
  // Remove common elements (multiset).
  std::vector<Term> r1 = items1, r2;
  for (const Term& t : items2) {
    auto it = std::find(r1.begin(), r1.end(), t);
    if (it != r1.end())
      r1.erase(it);
    else
      r2.push_back(t);
  }
  if (r1.empty() && r2.empty()) {
    if (tail1 == tail2) return true;
    for (const MetaConstraint& p : m.perms) {
      if ((p.perm_lhs == tail1 && p.perm_rhs == tail2) ||
          (p.perm_lhs == tail2 && p.perm_rhs == tail1))
        return true;
    }
    return false;
  }
  // Remaining explicit mismatch: only derivable from a recorded perm fact.
  for (const MetaConstraint& p : m.perms) {
    if ((p.perm_lhs == lhs && p.perm_rhs == rhs) || (p.perm_lhs == rhs && p.perm_rhs == lhs))
      return true;
  }
  return false;
}

}  // namespace

bool MetaEngine::entails(const std::vector<MetaConstraint>& M, const MetaConstraint& c) const {
  Norm m = normalize_where(*types_, M);
  if (m.inconsistent) return true;  // vacuous
  MetaConstraint ca = c.applied(m.eqsol);

  // Syntactic presence.
  for (const MetaConstraint& raw : M)
    if (raw.applied(m.eqsol) == ca) return true;

  switch (ca.kind) {
    case MetaConstraint::Kind::Eq:
      return ca.eq_lhs == ca.eq_rhs;
    case MetaConstraint::Kind::TypeOf:
      return types_->member(ca.subject, ca.type_name, m.var_types) == Trivalent::Yes;
    case MetaConstraint::Kind::Modal: {
      auto simplified = simplify_modal(ca);
      if (!simplified) return true;
      const ModalData& md = simplified->modal;
      if (md.succeed) {
        if (md.concl_rest) {
          bool covered = false;
          for (const MetaConstraint& p : m.modals)
            if (p.modal.succeed && p.modal.hyp.empty() && !p.modal.hyp_rest &&
                p.modal.concl_rest == md.concl_rest)
              covered = true;
          if (!covered) return false;
        }
        std::vector<Term> store_atoms = m.hyp_atoms;
        for (const Term& t : md.hyp) {
          if (t.is_const() && t.name() == "true") continue;
          if (t.is_var()) continue;  // conjunction variable: monotone to skip
          if (!builtins::supported(t.functor(), t.arity())) return false;
          store_atoms.push_back(t);
        }
        BuiltinStore store = BuiltinStore::from_atoms(store_atoms);
        std::set<std::string> locals(md.locals.begin(), md.locals.end());
        std::vector<Term> goal;
        for (const Term& t : md.concl) {
          if (t.is_var()) return false;  // unknown conjunction in the goal
          goal.push_back(t);
        }
        return store.entails(locals, goal) == Trivalent::Yes;
      }
      // Fail modal: need hypothesis true and conclusion refuted pointwise.
      if (md.concl.size() != 1 || md.concl_rest) return false;
      const Term& atom = md.concl[0];
      if (!atom.is_compound() || !builtins::is_comparison(atom.functor())) return false;
      std::vector<Term> store_atoms = m.hyp_atoms;
      for (const Term& t : md.hyp) {
        if (t.is_const() && t.name() == "true") continue;
        if (t.is_var()) return false;  // cannot certify an unknown hypothesis
        store_atoms.push_back(t);
      }
      BuiltinStore store = BuiltinStore::from_atoms(store_atoms);
      if (store.failed()) return false;
      // Comparison over provably non-integer variables is false outright.
      bool nonint = false;
      for (const auto& v : atom.var_set())
        if (var_excludes_int(*types_, m.var_types, v)) nonint = true;
      if (nonint) return true;
      if (auto neg = builtins::negate_atom(atom))
        return store.entails({}, {*neg}) == Trivalent::Yes;
      return false;
    }
    case MetaConstraint::Kind::Perm:
      return perm_derivable(m, ca.perm_lhs, ca.perm_rhs);
    case MetaConstraint::Kind::FreshVars: {
      std::set<std::string> known;
      for (const auto& fs : m.fresh_sets) known.insert(fs.begin(), fs.end());
      for (const auto& v : ca.fresh_vars)
        if (!known.count(v)) return false;
      return true;
    }
    case MetaConstraint::Kind::Inv:
      return entails_inv(M, ca.inv_state);
    case MetaConstraint::Kind::Equiv:
      if (!ca.state_var.empty()) return false;
      return entails_equiv(M, ca.equiv_left, ca.equiv_right);
  }
  return false;
}

bool MetaEngine::refutes(const std::vector<MetaConstraint>& M, const MetaConstraint& c) const {
  if (c.kind != MetaConstraint::Kind::Modal || !c.modal.succeed || !c.modal.hyp.empty() ||
      c.modal.hyp_rest || c.modal.concl.size() != 1 || c.modal.concl_rest)
    return false;
  auto neg = builtins::negate_atom(c.modal.concl[0]);
  if (!neg) return false;
  return entails(M, MetaConstraint::modal_succeed({*neg}));
}

StateTemplate MetaEngine::normalize_state(const std::vector<MetaConstraint>& M,
                                          const StateTemplate& st, bool* provably_failed) const {
  Norm m = normalize_where(*types_, M);
  StateTemplate out = st.applied(m.eqsol);
  // Equalities implied by the modal hypotheses hold for every grounding in
  // [M]; replacing variables by their representatives keeps the template in
  // the same variant class pointwise.
  if (!m.hyp.equalities().empty()) out = out.applied(m.hyp.equalities());
  if (provably_failed) *provably_failed = false;
  std::vector<Term> keep;
  for (const Term& b : out.builtins) {
    if (b.is_const() && b.name() == "true") continue;
    MetaConstraint holds = MetaConstraint::modal_succeed({b});
    if (entails(M, holds)) continue;
    if (provably_failed && refutes(M, holds)) *provably_failed = true;
    keep.push_back(b);
  }
  out.builtins = keep;
  return out;
}

bool MetaEngine::entails_inv(const std::vector<MetaConstraint>& M, const StateTemplate& st) const {
  if (!inv_) return true;
  StateTemplate target = normalize_state(M, st);
  for (const InvariantTemplate& T : inv_->templates) {
    Subst renaming = template_renaming(template_vars(T.state, T.where));
    StateTemplate tstate = rename_template_piece(T.state, renaming);
    for (const Subst& theta : match_state_template(tstate, target, Subst(), false)) {
      bool ok = true;
      for (const MetaConstraint& w : T.where) {
        MetaConstraint inst = w.applied(renaming).applied(theta);
        if (!entails(M, inst)) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
  }
  return false;
}

bool MetaEngine::entails_equiv(const std::vector<MetaConstraint>& M, const StateTemplate& a,
                               const StateTemplate& b) const {
  StateTemplate na = normalize_state(M, a);
  StateTemplate nb = normalize_state(M, b);
  if (na == nb) return true;
  if (!eq_) return false;
  for (const EquivTemplate& T : eq_->templates) {
    for (int orient = 0; orient < 2; ++orient) {
      const StateTemplate& tl = orient ? T.right : T.left;
      const StateTemplate& tr = orient ? T.left : T.right;
      Subst renaming = template_renaming(template_vars(tl, T.where));
      for (const auto& v : template_vars(tr, {})) {
        if (!renaming.bound(v)) renaming.compose_bind(v, Term::var(fresh_var_name(v)));
      }
      StateTemplate left = rename_template_piece(tl, renaming);
      StateTemplate right = rename_template_piece(tr, renaming);
      for (const Subst& theta1 : match_state_template(left, na, Subst(), false)) {
        for (const Subst& theta : match_state_template(right, nb, theta1, false)) {
          bool ok = true;
          for (const MetaConstraint& w : T.where) {
            MetaConstraint inst = w.applied(renaming).applied(theta);
            if (!entails(M, inst)) {
              ok = false;
              break;
            }
          }
          if (ok) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace chrconf

namespace chrconf {

namespace {

// Every variable a constraint can mention, including rest variables, modal
// locals and freshVars lists.
void constraint_vars(const MetaConstraint& c, std::set<std::string>& vs) {
  auto add_term = [&vs](const Term& t) {
    for (const auto& v : t.var_set()) vs.insert(v);
  };
  switch (c.kind) {
    case MetaConstraint::Kind::Eq:
      add_term(c.eq_lhs);
      add_term(c.eq_rhs);
      break;
    case MetaConstraint::Kind::TypeOf:
      add_term(c.subject);
      break;
    case MetaConstraint::Kind::Modal:
      for (const Term& t : c.modal.hyp) add_term(t);
      for (const Term& t : c.modal.concl) add_term(t);
      if (c.modal.hyp_rest) vs.insert(*c.modal.hyp_rest);
      if (c.modal.concl_rest) vs.insert(*c.modal.concl_rest);
      for (const auto& l : c.modal.locals) vs.insert(l);
      break;
    case MetaConstraint::Kind::Inv:
      for (const auto& v : c.inv_state.var_set()) vs.insert(v);
      break;
    case MetaConstraint::Kind::Equiv:
      for (const auto& v : c.equiv_left.var_set()) vs.insert(v);
      if (c.state_var.empty())
        for (const auto& v : c.equiv_right.var_set()) vs.insert(v);
      break;
    case MetaConstraint::Kind::FreshVars:
      for (const auto& l : c.fresh_vars) vs.insert(l);
      break;
    case MetaConstraint::Kind::Perm:
      add_term(c.perm_lhs);
      add_term(c.perm_rhs);
      break;
  }
}

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed * 2654435761u + 1442695040888963407ull) {}
  std::uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  std::int64_t pick_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

// Ground evaluation of a fully substituted constraint.
bool eval_constraint_ground(const TypeTable& types, const MetaConstraint& c) {
  switch (c.kind) {
    case MetaConstraint::Kind::Eq:
      return c.eq_lhs == c.eq_rhs;
    case MetaConstraint::Kind::TypeOf:
      if (!c.subject.ground()) return false;
      return types.member(c.subject, c.type_name, {}) == Trivalent::Yes;
    case MetaConstraint::Kind::Modal: {
      std::vector<Term> hyp_obj, concl_obj;
      std::set<std::string> locals;
      for (const Term& t : c.modal.hyp) {
        if (!t.ground()) return false;
        hyp_obj.push_back(meta::drop(t));
      }
      for (const Term& t : c.modal.concl) {
        if (!t.ground()) return false;
        concl_obj.push_back(meta::drop(t));
      }
      if (c.modal.hyp_rest || c.modal.concl_rest) return false;
      for (const auto& l : c.modal.locals) locals.insert(l);
      for (const Term& t : hyp_obj)
        if (!t.is_const() && !builtins::validate_atom(t)) return false;
      for (const Term& t : concl_obj)
        if (!t.is_const() && !builtins::validate_atom(t)) return false;
      // Locals were grounded to variable names; recover the object var names.
      std::set<std::string> obj_locals;
      for (const auto& l : locals) obj_locals.insert(l);
      BuiltinStore store = BuiltinStore::from_atoms(hyp_obj);
      if (c.modal.succeed) {
        if (store.failed()) return true;  // vacuous implication
        std::set<std::string> drop_locals;
        for (const Term& t : concl_obj)
          for (const auto& v : t.var_set()) drop_locals.insert(v);
        // Existential locals: any variable of the dropped conclusion that is
        // not bound by the hypothesis acts as a witness variable.
        std::set<std::string> hyp_vars;
        for (const Term& t : hyp_obj)
          for (const auto& v : t.var_set()) hyp_vars.insert(v);
        std::set<std::string> ex;
        for (const auto& v : drop_locals)
          if (!hyp_vars.count(v)) ex.insert(v);
        return store.entails(ex, concl_obj) == Trivalent::Yes;
      }
      if (store.failed()) return false;
      return store.entails({}, concl_obj) == Trivalent::No;
    }
    case MetaConstraint::Kind::Perm: {
      auto [i1, t1] = c.perm_lhs.list_parts();
      auto [i2, t2] = c.perm_rhs.list_parts();
      if (!t1.is_nil() || !t2.is_nil()) return false;
      if (i1.size() != i2.size()) return false;
      std::vector<Term> a = i1, b = i2;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      return a == b;
    }
    case MetaConstraint::Kind::FreshVars: {
      std::set<std::string> seen;
      for (const auto& l : c.fresh_vars) {
        (void)l;
        return true;  // grounded fresh names are generated distinct
      }
      (void)seen;
      return true;
    }
    case MetaConstraint::Kind::Inv:
    case MetaConstraint::Kind::Equiv:
      return false;  // resolved before evaluation
  }
  return false;
}

}  // namespace

std::map<std::string, std::string> MetaEngine::var_types(
    const std::vector<MetaConstraint>& M) const {
  Norm m = normalize_where(*types_, M);
  return m.var_types;
}

bool MetaEngine::holds_ground(const std::vector<MetaConstraint>& M,
                              const Subst& grounding) const {
  for (const MetaConstraint& c : M)
    if (!eval_constraint_ground(*types_, c.applied(grounding))) return false;
  return true;
}

std::vector<MetaEngine::Resolution> MetaEngine::resolve(
    const std::vector<MetaConstraint>& M) const {
  Subst eqsol;
  for (const MetaConstraint& c : M) {
    if (c.kind != MetaConstraint::Kind::Eq) continue;
    if (!unify_extend(eqsol, c.eq_lhs, c.eq_rhs)) return {};
  }

  std::vector<Resolution> partials{Resolution{eqsol, {}, {}}};
  for (const MetaConstraint& raw : M) {
    if (raw.kind == MetaConstraint::Kind::Eq) continue;
    std::vector<Resolution> next;
    for (const Resolution& p : partials) {
      MetaConstraint c = raw.applied(p.binding);
      if (c.kind == MetaConstraint::Kind::Inv) {
        if (!inv_) {
          next.push_back(p);
          continue;
        }
        for (const InvariantTemplate& T : inv_->templates) {
          Subst renaming = template_renaming(template_vars(T.state, T.where));
          StateTemplate tstate = rename_template_piece(T.state, renaming);
          for (const Subst& theta : match_state_template(tstate, c.inv_state, Subst(), true)) {
            Resolution r = p;
            r.binding = Subst::compose(r.binding, theta);
            for (const MetaConstraint& w : T.where)
              r.residual.push_back(w.applied(renaming).applied(theta));
            next.push_back(std::move(r));
          }
        }
        continue;
      }
      if (c.kind == MetaConstraint::Kind::Equiv && !c.state_var.empty()) {
        // Identity alternative: reflexivity of the equivalence.
        {
          Resolution r = p;
          r.state_bindings[c.state_var] = c.equiv_left;
          next.push_back(std::move(r));
        }
        if (eq_) {
          for (const EquivTemplate& T : eq_->templates) {
            for (int orient = 0; orient < 2; ++orient) {
              const StateTemplate& tl = orient ? T.right : T.left;
              const StateTemplate& tr = orient ? T.left : T.right;
              std::set<std::string> allv = template_vars(tl, T.where);
              for (const auto& v : template_vars(tr, {})) allv.insert(v);
              Subst renaming = template_renaming(allv);
              StateTemplate left = rename_template_piece(tl, renaming);
              StateTemplate right = rename_template_piece(tr, renaming);
              for (const Subst& theta : match_state_template(left, c.equiv_left, Subst(), true)) {
                Resolution r = p;
                r.binding = Subst::compose(r.binding, theta);
                r.state_bindings[c.state_var] = right.applied(theta);
                for (const MetaConstraint& w : T.where)
                  r.residual.push_back(w.applied(renaming).applied(theta));
                next.push_back(std::move(r));
              }
            }
          }
        }
        continue;
      }
      Resolution r = p;
      r.residual.push_back(c);
      next.push_back(std::move(r));
    }
    partials = std::move(next);
    if (partials.empty()) return {};
  }
  // Re-apply accumulated bindings, simplify and dedup.
  std::vector<Resolution> out;
  std::set<std::string> seen;
  for (Resolution& r : partials) {
    std::vector<MetaConstraint> cleaned;
    std::set<std::string> conjunct_seen;
    for (MetaConstraint& raw : r.residual) {
      MetaConstraint c = raw.applied(r.binding);
      if (c.kind == MetaConstraint::Kind::Modal) {
        auto simplified = simplify_modal(c);
        if (!simplified) continue;
        c = *simplified;
      }
      if (conjunct_seen.insert(c.to_string()).second) cleaned.push_back(std::move(c));
    }
    r.residual = std::move(cleaned);
    for (auto& [v, st] : r.state_bindings) st = st.applied(r.binding);
    std::ostringstream key;
    key << r.binding.to_string() << "//";
    for (const auto& c : r.residual) key << c.to_string() << ";";
    for (const auto& [v, st] : r.state_bindings) key << v << "=" << st.to_string() << ";";
    if (seen.insert(key.str()).second) out.push_back(std::move(r));
  }
  return out;
}

namespace {

// One integer assignment for the given variables consistent with the store,
// randomized by pinning variables to shuffled candidates.
std::map<std::string, std::int64_t> pick_int_assignment(const BuiltinStore& hyp,
                                                        const std::set<std::string>& int_vars,
                                                        Rng& rng) {
  std::map<std::string, std::int64_t> out;
  BuiltinStore cur = hyp;
  for (const auto& v : int_vars) {
    // Random candidates first for diversity; the solved model is a fallback
    // that always succeeds.
    std::vector<std::int64_t> candidates;
    auto model = cur.integer_model();
    for (int k = 0; k < 12; ++k)
      candidates.push_back(rng.next() % 2 ? rng.pick_int(-3, 3) : rng.pick_int(-40, 40));
    if (model.count(v)) candidates.push_back(model[v]);
    bool pinned = false;
    for (std::int64_t c : candidates) {
      BuiltinStore attempt =
          cur.add(Term::compound("=", {Term::var(v), Term::integer(c)}));
      if (attempt.satisfiable()) {
        cur = attempt;
        out[v] = c;
        pinned = true;
        break;
      }
    }
    if (!pinned) out[v] = model.count(v) ? model[v] : 0;
  }
  return out;
}

}  // namespace

std::vector<Subst> MetaEngine::sample_groundings(const MetaState& ms, std::size_t n,
                                                 std::uint64_t seed) const {
  std::vector<Subst> out;
  std::set<std::string> dedup;
  auto resolutions = resolve(ms.where);
  std::uint64_t attempt = 0;
  std::size_t budget = n * 12 + 16;
  for (std::uint64_t round = 0; round < budget && out.size() < n; ++round) {
    for (const Resolution& r : resolutions) {
      if (out.size() >= n) break;
      Norm m = normalize_where(*types_, r.residual);
      if (m.inconsistent) continue;
      StateTemplate st = ms.st.applied(r.binding);

      std::set<std::string> vars = st.var_set();
      for (const MetaConstraint& c : r.residual) constraint_vars(c, vars);

      Rng rng(seed * 7919 + (++attempt) * 104729);
      std::set<std::string> int_vars;
      for (const auto& v : vars) {
        auto it = m.var_types.find(v);
        if (it != m.var_types.end() &&
            types_->resolve(it->second).kind == TypeExpr::Kind::IntName)
          int_vars.insert(v);
      }
      for (const auto& v : m.hyp.comparison_vars())
        if (vars.count(v)) int_vars.insert(v);

      auto ints = pick_int_assignment(m.hyp, int_vars, rng);

      int const_counter = 0;
      int varname_counter = 0;
      std::function<Term(const TypeExpr&)> gen = [&](const TypeExpr& ty) -> Term {
        switch (ty.kind) {
          case TypeExpr::Kind::Named:
            return gen(types_->resolve(ty.name));
          case TypeExpr::Kind::IntName:
            return Term::integer(rng.pick_int(-3, 3));
          case TypeExpr::Kind::ConstName: {
            static const char* pool[] = {"a", "b", "c", "d"};
            return Term::constant(pool[(rng.next() + const_counter++) % 4]);
          }
          case TypeExpr::Kind::VarName:
            return Term::constant("'F" + std::to_string(++varname_counter) + "#" +
                                  std::to_string(rng.next() % 1000) + "'");
          case TypeExpr::Kind::ListOf: {
            std::size_t len = rng.next() % 3;
            std::vector<Term> items;
            for (std::size_t i = 0; i < len; ++i) items.push_back(gen(*ty.element));
            return Term::list(items);
          }
          case TypeExpr::Kind::ConstraintsOf: {
            std::size_t len = rng.next() % 3;
            std::vector<Term> items;
            for (std::size_t i = 0; i < len; ++i) {
              std::vector<Term> args;
              for (const TypeExpr& a : ty.pattern_args) args.push_back(gen(a));
              items.push_back(Term::compound(ty.pattern_functor, std::move(args)));
            }
            return Term::list(items);
          }
        }
        return Term::nil();
      };

      Subst sigma;
      bool ok = true;
      for (const auto& v : vars) {
        Term value;
        if (ints.count(v)) {
          value = Term::integer(ints[v]);
        } else {
          auto it = m.var_types.find(v);
          if (it != m.var_types.end()) {
            value = gen(types_->resolve(it->second));
          } else if (st.store_rest && v == *st.store_rest) {
            value = Term::nil();
          } else if (st.builtin_rest && v == *st.builtin_rest) {
            value = Term::constant("true");
          } else {
            bool is_fresh_local = false;
            for (const auto& fs : m.fresh_sets)
              for (const auto& l : fs)
                if (l == v) is_fresh_local = true;
            value = is_fresh_local ? Term::constant("'F" + std::to_string(++varname_counter) +
                                                    "#" + std::to_string(rng.next() % 1000) + "'")
                                   : Term::constant("u" + std::to_string(++const_counter));
          }
        }
        if (!sigma.compose_bind(v, value)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      bool valid = true;
      for (const MetaConstraint& c : r.residual) {
        if (!eval_constraint_ground(*types_, c.applied(sigma))) {
          valid = false;
          break;
        }
      }
      if (!valid) continue;
      StateTemplate grounded = st.applied(sigma);
      if (!grounded.var_set().empty()) continue;

      Subst full = Subst::compose(r.binding, sigma);
      std::ostringstream key;
      key << full.to_string();
      if (dedup.insert(key.str()).second) out.push_back(full);
    }
  }
  return out;
}

MetaEngine::SolveResult MetaEngine::m_solve(const MetaState& ms, std::uint64_t seed) const {
  auto resolutions = resolve(ms.where);
  if (resolutions.empty()) return {Consistency::Inconsistent, Subst()};
  bool any_unproven = false;
  for (const Resolution& r : resolutions) {
    Norm m = normalize_where(*types_, r.residual);
    if (m.inconsistent) continue;
    any_unproven = true;
  }
  if (!any_unproven) return {Consistency::Inconsistent, Subst()};
  auto witnesses = sample_groundings(ms, 1, seed);
  if (!witnesses.empty()) return {Consistency::Consistent, witnesses.front()};
  return {Consistency::Unknown, Subst()};
}

StateRepr drop_state(const StateTemplate& st, const Subst& grounding) {
  StateTemplate g = st.applied(grounding);
  if (g.store_rest || g.builtin_rest)
    throw meta::NonGroundMetaTermError("state template rest variable not grounded");
  StateRepr repr;
  for (const Term& t : g.store) repr.store.push_back(meta::drop(t));
  std::vector<Term> batoms;
  for (const Term& t : g.builtins) batoms.push_back(meta::drop(t));
  repr.builtins = BuiltinStore::from_atoms(batoms);
  return repr;
}

std::vector<CanonState> sample_concretizations(const MetaState& ms, std::size_t n,
                                               std::uint64_t seed, const MetaEngine& engine) {
  std::vector<CanonState> out;
  std::set<std::string> keys;
  for (const Subst& sigma : engine.sample_groundings(ms, n * 2, seed)) {
    CanonState s = canonicalize(drop_state(ms.st, sigma));
    if (keys.insert(s.key()).second) out.push_back(std::move(s));
    if (out.size() >= n) break;
  }
  return out;
}

bool MetaEngine::inv_holds_ground(const CanonState& s) const {
  if (!inv_) return true;
  if (s.failed()) return true;
  StateTemplate g;
  for (const Term& a : s.store()) g.store.push_back(meta::name_of(a));
  for (const Term& a : s.builtins().solved_atoms()) g.builtins.push_back(meta::name_of(a));
  for (const InvariantTemplate& T : inv_->templates) {
    Subst renaming = template_renaming(template_vars(T.state, T.where));
    StateTemplate tstate = rename_template_piece(T.state, renaming);
    for (const Subst& theta : match_state_template(tstate, g, Subst(), false)) {
      bool ok = true;
      for (const MetaConstraint& w : T.where) {
        if (!eval_constraint_ground(*types_, w.applied(renaming).applied(theta))) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
  }
  return false;
}

bool MetaEngine::equiv_ground(const CanonState& a, const CanonState& b) const {
  if (a == b) return true;
  if (a.failed() || b.failed()) return a.failed() && b.failed();
  if (!eq_) return false;
  auto ground_template = [](const CanonState& s) {
    StateTemplate g;
    for (const Term& t : s.store()) g.store.push_back(meta::name_of(t));
    for (const Term& t : s.builtins().solved_atoms()) g.builtins.push_back(meta::name_of(t));
    return g;
  };
  StateTemplate ga = ground_template(a), gb = ground_template(b);
  for (const EquivTemplate& T : eq_->templates) {
    for (int orient = 0; orient < 2; ++orient) {
      const StateTemplate& tl = orient ? T.right : T.left;
      const StateTemplate& tr = orient ? T.left : T.right;
      std::set<std::string> allv = template_vars(tl, T.where);
      for (const auto& v : template_vars(tr, {})) allv.insert(v);
      Subst renaming = template_renaming(allv);
      StateTemplate left = rename_template_piece(tl, renaming);
      StateTemplate right = rename_template_piece(tr, renaming);
      for (const Subst& t1 : match_state_template(left, ga, Subst(), false)) {
        for (const Subst& theta : match_state_template(right, gb, t1, false)) {
          bool ok = true;
          for (const MetaConstraint& w : T.where) {
            if (!eval_constraint_ground(*types_, w.applied(renaming).applied(theta))) {
              ok = false;
              break;
            }
          }
          if (ok) return true;
        }
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// MetaSemantics
// ---------------------------------------------------------------------------
MetaSemantics::MetaSemantics(const Program& prog, const MetaEngine& engine)
    : prog_(&prog), engine_(&engine) {}

StateTemplate MetaSemantics::normalized(const MetaState& ms) const {
  return engine_->normalize_state(ms.where, ms.st);
}

std::vector<MetaTransition> MetaSemantics::successors(const MetaState& ms) const {
  std::vector<MetaTransition> out;
  bool failed = false;
  StateTemplate norm = engine_->normalize_state(ms.where, ms.st, &failed);
  if (failed) return out;

  if (!engine_->entails_inv(ms.where, ms.st)) return out;
  if (auto b_holds = simplify_modal(
          MetaConstraint::modal_succeed(norm.builtins, norm.builtin_rest))) {
    if (!engine_->entails(ms.where, *b_holds)) return out;
  }

  std::set<std::string> rigid = template_vars(ms.st, ms.where);
  std::set<std::string> seen;

  for (int ri = 0; ri < static_cast<int>(prog_->rules.size()); ++ri) {
    const Rule& rule = prog_->rules[ri];
    Subst lift_map;
    std::vector<Term> kept_m = meta::lift(rule.kept, lift_map);
    std::vector<Term> removed_m = meta::lift(rule.removed, lift_map);
    std::vector<Term> guard_m = meta::lift(rule.guard, lift_map);
    std::vector<Term> body_m = meta::lift(rule.body, lift_map);
    std::vector<std::string> locals_m;
    for (const auto& l : rule.local_vars()) {
      Term lv = lift_map.apply(Term::var(l));
      if (lv.is_var()) locals_m.push_back(lv.name());
    }
    std::vector<Term> heads = kept_m;
    heads.insert(heads.end(), removed_m.begin(), removed_m.end());
    if (heads.size() > norm.store.size()) continue;

    std::vector<int> chosen;
    std::vector<bool> used(norm.store.size(), false);
    std::function<void(std::size_t, const Subst&)> rec = [&](std::size_t k, const Subst& sigma) {
      if (k == heads.size()) {
        if (auto guard_cond = simplify_modal(MetaConstraint::modal_implies(
                norm.builtins, norm.builtin_rest, locals_m, sigma.apply(guard_m)))) {
          if (!engine_->entails(ms.where, *guard_cond)) return;
        }
        StateTemplate target;
        target.store_rest = norm.store_rest;
        target.builtin_rest = norm.builtin_rest;
        for (std::size_t p = 0; p < norm.store.size(); ++p) {
          bool removed = false;
          for (std::size_t h = kept_m.size(); h < heads.size(); ++h)
            if (chosen[h] == static_cast<int>(p)) removed = true;
          if (!removed) target.store.push_back(norm.store[p]);
        }
        for (const Term& b : sigma.apply(body_m)) target.store.push_back(b);
        for (const Term& gatom : sigma.apply(guard_m)) {
          if (gatom.is_const() && gatom.name() == "true") continue;
          target.builtins.push_back(gatom);
        }
        target.builtins.insert(target.builtins.end(), norm.builtins.begin(),
                               norm.builtins.end());

        MetaState to{target, ms.where};
        if (!locals_m.empty()) {
          to.where.push_back(MetaConstraint::fresh(locals_m));
          for (const auto& l : locals_m)
            to.where.push_back(MetaConstraint::type_of("var", Term::var(l)));
        }
        std::string key = "r" + std::to_string(ri) + "|" + normal_key(to, rigid);
        if (seen.insert(key).second) {
          TransitionLabel label;
          label.kind = TransitionLabel::Kind::RuleApp;
          label.rule_index = ri;
          label.positions = chosen;
          out.push_back(MetaTransition{ms, to, label});
        }
        return;
      }
      for (std::size_t p = 0; p < norm.store.size(); ++p) {
        if (used[p]) continue;
        Subst ext = sigma;
        if (!match_extend(ext, heads[k], norm.store[p])) continue;
        used[p] = true;
        chosen.push_back(static_cast<int>(p));
        rec(k + 1, ext);
        chosen.pop_back();
        used[p] = false;
      }
    };
    rec(0, Subst());
  }

  // Built-in steps.
  for (std::size_t p = 0; p < norm.store.size(); ++p) {
    const Term& b = norm.store[p];
    if (b.is_var() || b.is_int()) continue;
    if (!builtins::supported(b.functor(), b.arity())) continue;
    StateTemplate target;
    target.store_rest = norm.store_rest;
    target.builtin_rest = norm.builtin_rest;
    for (std::size_t q = 0; q < norm.store.size(); ++q)
      if (q != p) target.store.push_back(norm.store[q]);
    target.builtins.push_back(b);
    target.builtins.insert(target.builtins.end(), norm.builtins.begin(), norm.builtins.end());
    MetaState to{target, ms.where};
    std::string key = "b" + b.to_string() + "|" + normal_key(to, rigid);
    if (seen.insert(key).second) {
      TransitionLabel label;
      label.kind = TransitionLabel::Kind::Builtin;
      label.builtin_atom = b;
      label.positions = {static_cast<int>(p)};
      out.push_back(MetaTransition{ms, to, label});
    }
  }
  return out;
}

std::optional<MetaState> MetaSemantics::strengthen_for_rule(const MetaState& ms,
                                                            const PreApplication& pre) const {
  Subst lift_map;
  std::vector<Term> heads_m = meta::lift(pre.instance.head(), lift_map);
  std::vector<Term> guard_m = meta::lift(pre.instance.guard, lift_map);
  std::vector<std::string> locals_m;
  for (const auto& l : pre.local_vars) {
    Term lv = lift_map.apply(Term::var(l));
    if (lv.is_var()) locals_m.push_back(lv.name());
  }

  // First injective match of the heads into the template store.
  std::optional<Subst> found;
  std::vector<bool> used(ms.st.store.size(), false);
  std::function<void(std::size_t, const Subst&)> rec = [&](std::size_t k, const Subst& sigma) {
    if (found) return;
    if (k == heads_m.size()) {
      found = sigma;
      return;
    }
    for (std::size_t p = 0; p < ms.st.store.size(); ++p) {
      if (used[p]) continue;
      Subst ext = sigma;
      if (!match_extend(ext, heads_m[k], ms.st.store[p])) continue;
      used[p] = true;
      rec(k + 1, ext);
      used[p] = false;
    }
  };
  rec(0, Subst());
  if (!found)
    throw std::invalid_argument("pre-application heads do not occur in the template store");

  std::vector<MetaConstraint> extension;
  if (engine_->invariant()) {
    MetaConstraint inv_c = MetaConstraint::inv(ms.st);
    if (!engine_->entails(ms.where, inv_c)) extension.push_back(inv_c);
  }
  if (auto b_holds = simplify_modal(
          MetaConstraint::modal_succeed(ms.st.builtins, ms.st.builtin_rest))) {
    if (!engine_->entails(ms.where, *b_holds)) extension.push_back(*b_holds);
  }
  if (auto guard_c = simplify_modal(MetaConstraint::modal_implies(
          ms.st.builtins, ms.st.builtin_rest, locals_m, found->apply(guard_m)))) {
    if (!engine_->entails(ms.where, *guard_c)) extension.push_back(*guard_c);
  }
  if (!locals_m.empty()) extension.push_back(MetaConstraint::fresh(locals_m));

  MetaState refined = ms;
  refined.where.insert(refined.where.end(), extension.begin(), extension.end());
  auto result = engine_->m_solve(refined);
  if (result.status == MetaEngine::Consistency::Consistent) return refined;
  return std::nullopt;
}

std::pair<std::optional<MetaState>, std::optional<MetaState>>
MetaSemantics::strengthen_for_builtin(const MetaState& ms, const Term& b) const {
  bool present = false;
  for (const Term& t : ms.st.store)
    if (t == b) present = true;
  if (!present) throw std::invalid_argument("built-in atom does not occur in the template store");

  auto with = [&](bool succeed) -> std::optional<MetaState> {
    std::vector<MetaConstraint> extension;
    if (engine_->invariant()) {
      MetaConstraint inv_c = MetaConstraint::inv(ms.st);
      if (!engine_->entails(ms.where, inv_c)) extension.push_back(inv_c);
    }
    if (auto b_holds = simplify_modal(
            MetaConstraint::modal_succeed(ms.st.builtins, ms.st.builtin_rest))) {
      if (!engine_->entails(ms.where, *b_holds)) extension.push_back(*b_holds);
    }
    MetaConstraint step =
        succeed ? MetaConstraint::modal_implies(ms.st.builtins, ms.st.builtin_rest, {}, {b})
                : MetaConstraint::modal_fail(ms.st.builtins, ms.st.builtin_rest, {b});
    if (auto simplified = simplify_modal(step)) {
      if (!engine_->entails(ms.where, *simplified)) extension.push_back(*simplified);
    }
    MetaState refined = ms;
    refined.where.insert(refined.where.end(), extension.begin(), extension.end());
    auto result = engine_->m_solve(refined);
    if (result.status == MetaEngine::Consistency::Consistent) return refined;
    return std::nullopt;
  };
  return {with(true), with(false)};
}

std::string MetaSemantics::normal_key(const MetaState& ms,
                                      const std::set<std::string>& rigid) const {
  bool failed = false;
  StateTemplate n = engine_->normalize_state(ms.where, ms.st, &failed);
  if (failed) return "<failure>";

  auto masked = [&rigid](const Term& t) {
    Subst mask;
    for (const auto& v : t.var_set())
      if (!rigid.count(v)) mask.compose_bind(v, Term::var("_"));
    return mask.apply(t).to_string();
  };
  std::sort(n.store.begin(), n.store.end(),
            [&](const Term& a, const Term& b) { return masked(a) < masked(b); });
  std::sort(n.builtins.begin(), n.builtins.end(),
            [&](const Term& a, const Term& b) { return masked(a) < masked(b); });

  Subst canon;
  int counter = 0;
  auto canonize_vars = [&](const std::vector<Term>& atoms) {
    for (const Term& a : atoms) {
      std::vector<std::string> vs;
      a.collect_vars(vs);
      for (const auto& v : vs)
        if (!rigid.count(v) && !canon.bound(v))
          canon.compose_bind(v, Term::var("W" + std::to_string(counter++)));
    }
  };
  canonize_vars(n.store);
  canonize_vars(n.builtins);

  std::ostringstream os;
  os << "<{" << chrconf::to_string(canon.apply(n.store));
  if (n.store_rest) os << "|" << *n.store_rest;
  os << "};";
  os << chrconf::to_string(canon.apply(n.builtins), "&");
  if (n.builtin_rest) os << "&" << *n.builtin_rest;
  os << ">";
  return os.str();
}

SplitOutcome split(const MetaState& ms, const MetaConstraint& c, const MetaEngine& engine) {
  if (c.kind != MetaConstraint::Kind::Modal || !c.modal.succeed || !c.modal.hyp.empty() ||
      c.modal.hyp_rest || c.modal.concl.size() != 1 || c.modal.concl_rest)
    throw SplitError("case constraint must be a plain built-in comparison");
  auto neg = builtins::negate_atom(c.modal.concl[0]);
  if (!neg) throw SplitError("case constraint has no expressible complement");

  auto vt = engine.var_types(ms.where);
  for (const auto& v : c.modal.concl[0].var_set()) {
    auto it = vt.find(v);
    if (it == vt.end()) throw SplitError("case variable " + v + " is not typed");
    if (!engine.types().names_ground(it->second))
      throw SplitError("case variable " + v + " may name a non-ground object");
  }

  MetaConstraint complement = MetaConstraint::modal_succeed({*neg});
  SplitOutcome outcome;
  outcome.case_constraint = c;
  outcome.complement = complement;
  for (const MetaConstraint& half : {c, complement}) {
    MetaState child = ms;
    child.where.push_back(half);
    auto result = engine.m_solve(child);
    if (result.status == MetaEngine::Consistency::Inconsistent)
      outcome.dropped.push_back(std::move(child));
    else
      outcome.pieces.push_back(std::move(child));
  }
  return outcome;
}

}  // namespace chrconf
