#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chrconf/program.hpp"
#include "chrconf/state.hpp"

namespace chrconf {

// ---------------------------------------------------------------------------
// Ground representation. Object variables are named by constants written
// 'X'; every other symbol lifts to an identically-written symbol. Meta
// variables are ordinary Term variables at this level.
// ---------------------------------------------------------------------------
namespace meta {

/// Ground name of an object entity: variable X becomes the constant 'X'.
Term name_of(const Term& object);

/// Lifting: name the entity, then replace variable names consistently by
/// fresh meta variables (recorded in var_map: object var name -> meta var).
Term lift(const Term& object, Subst& var_map);
std::vector<Term> lift(const std::vector<Term>& objects, Subst& var_map);

class NonGroundMetaTermError : public std::runtime_error {
 public:
  explicit NonGroundMetaTermError(const std::string& m) : std::runtime_error(m) {}
};

/// Inverse of naming; the meta term must be ground.
Term drop(const Term& meta_term);

bool is_var_name(const Term& t);  // constant naming an object variable

}  // namespace meta

// ---------------------------------------------------------------------------
// Meta-level states: <store (+ rest variable) ; builtins (+ rest variable)>.
// Multisets and conjunctions are list-encoded when bound to rest variables.
// ---------------------------------------------------------------------------
struct StateTemplate {
  std::vector<Term> store;
  std::optional<std::string> store_rest;
  std::vector<Term> builtins;
  std::optional<std::string> builtin_rest;

  /// Substitution with flattening: a rest variable bound to a list term
  /// contributes its elements to the atom vectors; 'true' and '[]' clear it.
  StateTemplate applied(const Subst& s) const;
  std::set<std::string> var_set() const;
  std::string to_string() const;
  bool operator==(const StateTemplate&) const;
};

struct ModalData {
  bool succeed = true;                  // |= F, or =| F when false
  std::vector<Term> hyp;                // antecedent atoms; empty means plain F
  std::optional<std::string> hyp_rest;  // conjunction-valued meta variable
  std::vector<std::string> locals;      // existentially quantified locals
  std::vector<Term> concl;
  std::optional<std::string> concl_rest;

  bool operator==(const ModalData&) const;
};

/// One conjunct of a WHERE constraint set (the meta constraint theory).
struct MetaConstraint {
  enum class Kind { Eq, TypeOf, Modal, Inv, Equiv, FreshVars, Perm };
  Kind kind = Kind::Eq;

  Term eq_lhs, eq_rhs;           // Eq
  std::string type_name;         // TypeOf
  Term subject;                  // TypeOf
  ModalData modal;               // Modal
  StateTemplate inv_state;       // Inv
  StateTemplate equiv_left;      // Equiv
  StateTemplate equiv_right;     // Equiv (used when state_var empty)
  std::string state_var;         // Equiv with an unknown right-hand state
  std::vector<std::string> fresh_vars;  // FreshVars
  Term perm_lhs, perm_rhs;       // Perm

  static MetaConstraint eq(Term lhs, Term rhs);
  static MetaConstraint type_of(std::string type_name, Term subject);
  static MetaConstraint modal_succeed(std::vector<Term> concl,
                                      std::optional<std::string> concl_rest = std::nullopt);
  static MetaConstraint modal_implies(std::vector<Term> hyp, std::optional<std::string> hyp_rest,
                                      std::vector<std::string> locals, std::vector<Term> concl);
  static MetaConstraint modal_fail(std::vector<Term> hyp, std::optional<std::string> hyp_rest,
                                   std::vector<Term> concl);
  static MetaConstraint inv(StateTemplate st);
  static MetaConstraint equiv(StateTemplate left, StateTemplate right);
  static MetaConstraint equiv_var(StateTemplate left, std::string state_var);
  static MetaConstraint fresh(std::vector<std::string> vars);
  static MetaConstraint perm(Term lhs, Term rhs);

  MetaConstraint applied(const Subst& s) const;
  bool operator==(const MetaConstraint&) const;
  std::string to_string() const;
};

/// Constrained meta-level state: template WHERE constraints.
struct MetaState {
  StateTemplate st;
  std::vector<MetaConstraint> where;

  std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Types of the meta constraint theory: membership-decidable sets of ground
// meta terms. Base types var/const/int plus declared list and constraint-set
// types.
// ---------------------------------------------------------------------------
struct TypeExpr {
  enum class Kind { VarName, ConstName, IntName, ListOf, ConstraintsOf, Named };
  Kind kind = Kind::ConstName;
  std::string name;                        // Named reference
  std::shared_ptr<TypeExpr> element;       // ListOf
  std::string pattern_functor;             // ConstraintsOf
  std::vector<TypeExpr> pattern_args;      // ConstraintsOf

  static TypeExpr base(Kind k);
  static TypeExpr named(std::string name);
  static TypeExpr list_of(TypeExpr elem);
  static TypeExpr constraints_of(std::string functor, std::vector<TypeExpr> args);
  std::string to_string() const;
};

class TypeTable {
 public:
  TypeTable();
  void declare(const std::string& name, TypeExpr def);
  bool declared(const std::string& name) const;
  const TypeExpr& resolve(const std::string& name) const;  // throws on unknown

  /// Membership of a meta term with rigid variables; var_types supplies the
  /// declared type of each rigid variable.
  Trivalent member(const Term& t, const TypeExpr& ty,
                   const std::map<std::string, std::string>& var_types) const;
  Trivalent member(const Term& t, const std::string& type_name,
                   const std::map<std::string, std::string>& var_types) const;

  /// True when every member of the type names a ground object entity
  /// (everything except var); required for bivalent modal splits.
  bool names_ground(const TypeExpr& ty) const;
  bool names_ground(const std::string& type_name) const;

 private:
  std::map<std::string, TypeExpr> defs_;
};

struct InvariantTemplate {
  StateTemplate state;
  std::vector<MetaConstraint> where;
};
struct InvariantSpec {
  std::vector<InvariantTemplate> templates;
  bool empty() const { return templates.empty(); }
};

struct EquivTemplate {
  StateTemplate left, right;
  std::vector<MetaConstraint> where;
};
struct EquivSpec {
  std::vector<EquivTemplate> templates;  // symmetric closure applied at use
  bool empty() const { return templates.empty(); }
};

// ---------------------------------------------------------------------------
// Decision procedures over WHERE constraint sets.
// ---------------------------------------------------------------------------
class MetaEngine {
 public:
  MetaEngine(const TypeTable& types, const InvariantSpec* inv, const EquivSpec* eq);

  const TypeTable& types() const { return *types_; }
  const InvariantSpec* invariant() const { return inv_; }
  const EquivSpec* equivalence() const { return eq_; }

  enum class Consistency { Consistent, Inconsistent, Unknown };
  struct SolveResult {
    Consistency status = Consistency::Unknown;
    Subst witness;  // grounds the state template and constraint variables
  };
  /// Consistency of [where] for the given state: a witness grounding, a
  /// proof of emptiness, or unknown (treated as "cannot prove" by callers).
  SolveResult m_solve(const MetaState& ms, std::uint64_t seed = 1) const;

  /// Entailment M |= c; only a definite yes is returned as true.
  bool entails(const std::vector<MetaConstraint>& M, const MetaConstraint& c) const;
  /// M |= not c, for plain single-atom modal constraints.
  bool refutes(const std::vector<MetaConstraint>& M, const MetaConstraint& c) const;
  bool entails_inv(const std::vector<MetaConstraint>& M, const StateTemplate& st) const;
  bool entails_equiv(const std::vector<MetaConstraint>& M, const StateTemplate& a,
                     const StateTemplate& b) const;

  /// Solves Eq, Inv and Equiv conjuncts into bindings over the state's
  /// variables plus residual constraints; one result per template choice.
  struct Resolution {
    Subst binding;
    std::vector<MetaConstraint> residual;
    std::map<std::string, StateTemplate> state_bindings;  // Equiv state variables
  };
  std::vector<Resolution> resolve(const std::vector<MetaConstraint>& M) const;

  /// Up to n distinct valid groundings of ms (bounded typed enumeration).
  std::vector<Subst> sample_groundings(const MetaState& ms, std::size_t n,
                                       std::uint64_t seed) const;

  /// Declared type per variable, extracted from the TypeOf conjuncts.
  std::map<std::string, std::string> var_types(const std::vector<MetaConstraint>& M) const;

  /// Ground evaluation: does the grounding satisfy every conjunct? (Inv and
  /// Equiv conjuncts must have been resolved away.)
  bool holds_ground(const std::vector<MetaConstraint>& M, const Subst& grounding) const;

  /// Ground checks used by the oracle and the invariant audit.
  bool inv_holds_ground(const CanonState& s) const;
  bool equiv_ground(const CanonState& a, const CanonState& b) const;

  /// Built-in atoms entailed by M are dropped (the representation stays in
  /// the same variant class for every grounding); sets *provably_failed when
  /// some built-in atom is refuted by M.
  StateTemplate normalize_state(const std::vector<MetaConstraint>& M, const StateTemplate& st,
                                bool* provably_failed = nullptr) const;

 private:
  const TypeTable* types_;
  const InvariantSpec* inv_;
  const EquivSpec* eq_;
};

/// Object state denoted by a ground instance of the template.
StateRepr drop_state(const StateTemplate& st, const Subst& grounding);

/// Up to n distinct object states denoted by ms (concretization sampling).
std::vector<CanonState> sample_concretizations(const MetaState& ms, std::size_t n,
                                               std::uint64_t seed, const MetaEngine& engine);

// ---------------------------------------------------------------------------
// Meta transition relation (rule application and built-in steps whose side
// conditions are entailed by the WHERE part) and the greatest-substate
// strengthenings.
// ---------------------------------------------------------------------------
struct MetaTransition {
  MetaState from, to;
  TransitionLabel label;
};

class MetaSemantics {
 public:
  MetaSemantics(const Program& prog, const MetaEngine& engine);

  std::vector<MetaTransition> successors(const MetaState& ms) const;

  std::optional<MetaState> strengthen_for_rule(const MetaState& ms,
                                               const PreApplication& pre) const;
  std::pair<std::optional<MetaState>, std::optional<MetaState>> strengthen_for_builtin(
      const MetaState& ms, const Term& b) const;

  /// Canonical key relative to the WHERE part: entailed built-in atoms are
  /// dropped, atoms sorted, non-rigid variables renamed by first occurrence.
  std::string normal_key(const MetaState& ms, const std::set<std::string>& rigid) const;
  StateTemplate normalized(const MetaState& ms) const;

  const Program& program() const { return *prog_; }
  const MetaEngine& engine() const { return *engine_; }

 private:
  const Program* prog_;
  const MetaEngine* engine_;
};

class SplitError : public std::runtime_error {
 public:
  explicit SplitError(const std::string& m) : std::runtime_error(m) {}
};

struct SplitOutcome {
  std::vector<MetaState> pieces;              // consistent (or unknown) halves
  std::vector<MetaState> dropped;             // provably inconsistent halves
  MetaConstraint case_constraint;             // as applied to the first half
  MetaConstraint complement;
};

/// Case split on a plain modal comparison whose variables are typed by
/// ground-naming types; the two halves' concretizations union to [ms].
SplitOutcome split(const MetaState& ms, const MetaConstraint& c, const MetaEngine& engine);

}  // namespace chrconf
