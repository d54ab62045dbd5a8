#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chrconf/meta.hpp"
#include "chrconf/specs.hpp"
#include "chrconf/state.hpp"

namespace chrconf {

enum class Verdict { Confluent, LocallyConfluent, NotConfluent, CannotProve };
std::string to_string(Verdict v);

/// Critical corner: alpha (two rule applications from an overlap ancestor) or
/// beta (equivalence step beside a transition). All three states share their
/// variables and the WHERE constraint set; classical corners have an empty
/// WHERE and are checked with the variables held rigid.
struct CriticalCorner {
  enum class Kind { Alpha, BetaRule, BetaBuiltin };
  Kind kind = Kind::Alpha;

  StateTemplate ancestor, left, right;
  std::vector<MetaConstraint> where;

  int rule_left = -1;              // alpha: rule applied on the left wing
  int rule_right = -1;             // alpha: right wing; beta: the rule applied
  std::vector<Term> overlap;       // alpha: the unified overlap atoms
  Subst unifier;                   // alpha: the overlap mgu
  Term builtin_atom;               // beta by built-in
  bool left_is_equiv = false;      // beta corners: left wing related by equivalence

  std::set<std::string> rigid_vars() const;
  std::string to_string() const;
  /// Invariant under rule reordering and variable renaming (used for dedup).
  std::string canonical_key() const;
};

std::vector<CriticalCorner> critical_alpha_corners_classical(const Program& prog);
std::vector<CriticalCorner> critical_alpha_corners_meta(const Program& prog,
                                                        const MetaEngine& engine);
std::vector<CriticalCorner> critical_beta_corners(const Program& prog, const MetaEngine& engine);

struct JoinStep {
  TransitionLabel label;
  MetaState state;
};

struct JoinabilityProof {
  enum class Closed { Equal, Equiv };
  std::vector<JoinStep> left_path, right_path;
  Closed closed = Closed::Equal;
};

/// Audit trail consumed by the acceptance probes: every meta transition taken
/// and every split performed during a run.
struct AuditSink {
  std::vector<MetaTransition> meta_transitions;
  struct SplitEvent {
    MetaState original;
    std::vector<MetaState> pieces;
  };
  std::vector<SplitEvent> splits;
};

/// Bounded search for joinability of the corner's wings in the meta system;
/// absence is depth exhaustion, not a refutation.
std::optional<JoinabilityProof> joinable(const CriticalCorner& corner, const MetaSemantics& sem,
                                         int join_depth, AuditSink* audit = nullptr);

struct SplitTree {
  enum class Status { Joinable, Inconsistent, Split, Stuck };
  Status status = Status::Stuck;
  CriticalCorner corner;
  std::optional<JoinabilityProof> proof;          // Joinable
  std::optional<MetaConstraint> case_constraint;  // Split
  std::vector<SplitTree> children;                // Split
  std::string stuck_reason;

  bool split_joinable() const;
};

SplitTree split_joinable(const CriticalCorner& corner, const MetaSemantics& sem,
                         const std::vector<Term>& user_candidates, int split_depth,
                         int join_depth, AuditSink* audit = nullptr);

enum class CheckMode { Classical, Invariant, ModEquiv };
std::string to_string(CheckMode m);

struct CheckLimits {
  int join_depth = 8;
  int split_depth = 4;
  EnumLimits enumeration;
  std::uint64_t seed = 1;
};

struct CheckOptions {
  CheckMode mode = CheckMode::Classical;
  bool assume_terminating = false;
  CheckLimits limits;
  bool include_beta = true;      // internal knob, exercised by the test suite
  bool audit_invariant = false;  // sampling audit that rules preserve the invariant
  std::size_t cross_check = 0;   // oracle cross-validation instances per corner
};

struct CrossCheckEntry {
  std::string instance;  // canonical initial state
  std::string oracle_status;
  bool agrees = false;
};

struct CornerReport {
  CriticalCorner corner;
  SplitTree tree;
  // Classical mode / certification evidence:
  bool exhaustive = false;            // both wings' closures fully enumerated
  bool wings_joinable = false;        // exhaustive closures intersect
  bool certified_nonjoinable = false; // exhaustive, disjoint closures
  std::optional<CanonState> witness_ancestor;
  std::size_t left_closure = 0, right_closure = 0;
};

struct CheckResult {
  Verdict verdict = Verdict::CannotProve;
  CheckMode mode = CheckMode::Classical;
  bool termination_asserted = false;
  std::vector<CornerReport> corners;
  std::vector<CrossCheckEntry> cross_checks;
  std::vector<std::string> notes;
  std::vector<std::string> invariant_warnings;
  double seconds = 0.0;
  AuditSink audit;
};

/// Runs the requested confluence check. Invariant and mod-equiv modes require
/// a CheckerSpec (mod-equiv additionally a nonempty equivalence).
CheckResult check(const Program& prog, const CheckerSpec* spec, const CheckOptions& options);

}  // namespace chrconf
