#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chrconf/term.hpp"

namespace chrconf {

enum class Trivalent { Yes, No, Unknown };

class UnsupportedBuiltinError : public std::runtime_error {
 public:
  explicit UnsupportedBuiltinError(const std::string& message) : std::runtime_error(message) {}
};

namespace builtins {

/// Supported vocabulary: true/0, fail/0, =/2 (Herbrand equality with
/// occurs-check), ==/2 (same), and integer comparisons </2, =</2, >/2, >=/2
/// over difference-bound linear forms (v, c, v+c, v-w).
bool supported(const std::string& functor, std::size_t arity);
bool is_comparison(const std::string& functor);
bool is_equality(const std::string& functor);

/// Checks vocabulary membership and the linear fragment (comparisons must
/// reduce to at most one positive and one negative variable; equalities must
/// not contain arithmetic functors).
bool validate_atom(const Term& atom, std::string* why = nullptr);

/// Complement of a comparison atom over the integers (< vs >=, =< vs >).
std::optional<Term> negate_atom(const Term& atom);

}  // namespace builtins

/// Conjunction of built-ins kept in solved form: an idempotent, canonically
/// oriented equality substitution plus a closed difference-bound system over
/// the remaining variables (implied equalities extracted). Immutable value;
/// add() returns a new store.
class BuiltinStore {
 public:
  BuiltinStore() = default;

  static BuiltinStore from_atoms(const std::vector<Term>& atoms);
  BuiltinStore add(const Term& atom) const;
  BuiltinStore add_all(const std::vector<Term>& atoms) const;

  bool satisfiable() const { return sat_; }
  bool failed() const { return !sat_; }
  bool trivial() const { return sat_ && eq_.empty() && bounds_.empty(); }

  /// Three-valued check of B -> exists(locals) goal within the fragment.
  /// Yes and No are proofs; Unknown must be treated as "cannot prove".
  Trivalent entails(const std::set<std::string>& locals, const std::vector<Term>& goal) const;

  /// Logical equivalence of solved forms after applying the renaming to *this.
  bool equivalent(const BuiltinStore& other, const Subst& renaming) const;

  const Subst& equalities() const { return eq_; }
  Term apply(const Term& t) const { return eq_.apply(t); }
  std::vector<Term> apply(const std::vector<Term>& ts) const { return eq_.apply(ts); }

  /// Solved form rendered as atoms in canonical order (equalities then bounds).
  std::vector<Term> solved_atoms() const;
  const std::vector<Term>& raw_atoms() const { return atoms_; }

  /// Variables constrained by the difference-bound part (integer-valued).
  std::set<std::string> comparison_vars() const;
  /// One integer solution of the difference-bound part, when satisfiable.
  std::map<std::string, std::int64_t> integer_model() const;

  /// Store with all variables renamed; re-solved so the form stays canonical.
  BuiltinStore renamed(const Subst& renaming) const;
  BuiltinStore renamed(const std::map<std::string, std::string>& renaming) const;

  /// Existential projection onto the given variables: solved equalities are
  /// eliminated entirely (their variables were substituted away) and only
  /// difference bounds between kept variables (and the zero node) survive;
  /// exact within the fragment because the bound system is closed.
  BuiltinStore projected(const std::set<std::string>& keep) const;

  std::string to_string() const;

 private:
  struct Bound {
    std::string a, b;  // a - b <= c; empty string is the zero node
    std::int64_t c;
    auto operator<=>(const Bound&) const = default;
  };

  void solve();

  std::vector<Term> atoms_;  // raw conjunction, for renaming / recombination
  Subst eq_;
  std::vector<Bound> bounds_;
  bool sat_ = true;
};

}  // namespace chrconf
