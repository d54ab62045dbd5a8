#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chrconf {

enum class TermKind : std::uint8_t { Var, Const, Int, Compound };

/// Immutable first-order term: variable, constant, integer or compound.
/// Zero-arity compounds are represented as Const. Terms are values; copies
/// share structure and are safe to send between threads.
class Term {
 public:
  Term();  // the constant 'true'

  static Term var(std::string name);
  static Term constant(std::string name);
  static Term integer(std::int64_t value);
  static Term compound(std::string functor, std::vector<Term> args);

  // Prolog-style list helpers ('[]' and '.'/2).
  static Term nil();
  static Term cons(Term head, Term tail);
  static Term list(const std::vector<Term>& items);
  static Term list(const std::vector<Term>& items, Term tail);

  TermKind kind() const { return kind_; }
  bool is_var() const { return kind_ == TermKind::Var; }
  bool is_const() const { return kind_ == TermKind::Const; }
  bool is_int() const { return kind_ == TermKind::Int; }
  bool is_compound() const { return kind_ == TermKind::Compound; }

  const std::string& name() const;     // Var and Const
  std::int64_t value() const;          // Int
  const std::string& functor() const;  // Compound (and Const, as 0-ary functor)
  const std::vector<Term>& args() const;
  std::size_t arity() const;

  bool is_nil() const;
  bool is_cons() const;
  /// Splits a list term into its explicit prefix and final tail
  /// (nil for proper lists, a variable or other term otherwise).
  std::pair<std::vector<Term>, Term> list_parts() const;

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }
  /// Total structural order: by kind, then payload. Used for canonical sorting.
  int compare(const Term& other) const;
  bool operator<(const Term& other) const { return compare(other) < 0; }

  bool ground() const;
  bool contains_var(const std::string& var_name) const;
  void collect_vars(std::vector<std::string>& out) const;  // in traversal order, deduped
  std::set<std::string> var_set() const;
  std::size_t node_count() const;

  std::string to_string() const;
  /// Rendering with every variable printed as "_"; invariant under renaming.
  std::string skeleton() const;

 private:
  struct Node;
  Term(TermKind k, std::shared_ptr<const Node> n);
  TermKind kind_;
  std::shared_ptr<const Node> node_;
};

/// Idempotent substitution from variable names to terms. No binding maps a
/// variable to itself; composing keeps the idempotence invariant.
class Subst {
 public:
  Subst() = default;

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  bool bound(const std::string& var_name) const;
  std::optional<Term> lookup(const std::string& var_name) const;
  const std::map<std::string, Term>& bindings() const { return bindings_; }

  Term apply(const Term& t) const;
  std::vector<Term> apply(const std::vector<Term>& ts) const;

  /// Adds var -> t (t is normalized against *this first, existing ranges are
  /// rewritten). Fails on occurs-check violation. Binding a variable to
  /// itself is a no-op.
  bool compose_bind(const std::string& var_name, const Term& t);

  /// Left-to-right composition: result.apply(t) == other.apply(this->apply(t)).
  static Subst compose(const Subst& first, const Subst& second);

  std::string to_string() const;
  bool operator==(const Subst& other) const { return bindings_ == other.bindings_; }

 private:
  std::map<std::string, Term> bindings_;
};

/// Most general unifier with occurs-check, or nullopt if none exists.
std::optional<Subst> unify(const Term& t1, const Term& t2);
/// Unification threaded through an accumulated substitution.
bool unify_extend(Subst& sigma, const Term& t1, const Term& t2);

/// One-way matching: binds only pattern variables; target variables are rigid.
std::optional<Subst> match(const Term& pattern, const Term& target);
/// Matching threaded through an accumulated substitution (pattern side only).
bool match_extend(Subst& sigma, const Term& pattern, const Term& target);

/// Session-scoped fresh-name supply. Produces names containing '#', which the
/// parser never emits, so fresh variables cannot collide with parsed ones.
/// Safe to call concurrently.
std::string fresh_var_name(const std::string& base);

/// Variant of t with variables renamed to fresh ones disjoint from avoid;
/// consistent (same old variable, same fresh variable). The applied renaming
/// is appended to *renaming when given.
Term rename_apart(const Term& t, const std::set<std::string>& avoid, Subst* renaming = nullptr);
std::vector<Term> rename_apart(const std::vector<Term>& ts, const std::set<std::string>& avoid,
                               Subst* renaming = nullptr);

/// Simultaneous variable renaming (domain and range may overlap, unlike a
/// Subst); variables outside the map are left untouched.
Term rename_vars(const Term& t, const std::map<std::string, std::string>& renaming);
std::vector<Term> rename_vars(const std::vector<Term>& ts,
                              const std::map<std::string, std::string>& renaming);

std::string to_string(const std::vector<Term>& ts, const char* sep = ", ");

}  // namespace chrconf
