#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chrconf/builtins.hpp"
#include "chrconf/program.hpp"

namespace chrconf {

/// State representation <S, B>: constraint-store multiset plus built-in
/// conjunction. Any representation with an unsatisfiable built-in store is
/// identified with failure.
struct StateRepr {
  std::vector<Term> store;
  BuiltinStore builtins;

  bool failed() const { return builtins.failed(); }
};

/// Canonical representative of a state (equivalence class of representations
/// under renaming and built-in equivalence). Two representations are variants
/// iff their CanonStates compare equal; this is sound, and complete within
/// the decidable fragment and the canonicalization's permutation budget.
class CanonState {
 public:
  CanonState() = default;
  static CanonState failure();

  bool failed() const { return failed_; }
  const std::string& key() const { return key_; }
  const std::vector<Term>& store() const { return store_; }
  const BuiltinStore& builtins() const { return builtins_; }

  bool operator==(const CanonState& other) const { return key_ == other.key_; }
  bool operator!=(const CanonState& other) const { return key_ != other.key_; }
  bool operator<(const CanonState& other) const { return key_ < other.key_; }

  std::string to_string() const { return key_; }

 private:
  friend CanonState canonicalize(const StateRepr& repr);
  bool failed_ = false;
  std::vector<Term> store_;
  BuiltinStore builtins_;
  std::string key_;
};

/// Idempotent; variants map to the identical canonical value.
CanonState canonicalize(const StateRepr& repr);

struct TransitionLabel {
  enum class Kind { RuleApp, Builtin };
  Kind kind = Kind::RuleApp;
  int rule_index = -1;
  std::vector<int> positions;  // store positions consumed by the head match
  Term builtin_atom;

  std::string to_string(const Program* prog = nullptr) const;
};

struct Transition {
  CanonState from, to;
  TransitionLabel label;
};

/// All rule-application transitions (every rule, every injective head match
/// with entailed guard) and all built-in transitions from s. Symmetric
/// duplicates are deduplicated by canonical successor state.
std::vector<Transition> successors(const CanonState& s, const Program& prog);

struct EnumLimits {
  std::size_t max_states = 10000;
  std::size_t max_depth = 200;
};

struct TransitionGraph {
  struct Edge {
    int from, to;
    TransitionLabel label;
  };

  std::vector<CanonState> nodes;
  std::map<std::string, int> index;  // canonical key -> node id
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> out_edges;
  bool truncated = false;
  std::size_t depth_reached = 0;

  int add_node(const CanonState& s);
  int find(const CanonState& s) const;
  /// Nodes reachable from each node, including itself (bitset rows).
  std::vector<std::vector<std::uint64_t>> reachability() const;
  static bool bit(const std::vector<std::uint64_t>& row, int i);
  std::vector<int> final_states() const;

  std::string to_dot(const Program* prog = nullptr) const;
  std::string to_json(const Program* prog = nullptr) const;
};

TransitionGraph enumerate_reachable(const std::vector<CanonState>& inits, const Program& prog,
                                    const EnumLimits& limits);

/// Ground state equivalence for the oracle. Exactly one of the two forms is
/// used: class_key (kernel of a normalization function; scales linearly) or
/// pairwise (arbitrary relation; closed by union-find over enumerated states).
struct OracleEquiv {
  std::function<std::string(const CanonState&)> class_key;
  std::function<bool(const CanonState&, const CanonState&)> pairwise;
};

struct CornerWitness {
  CanonState ancestor, left, right;
  std::optional<TransitionLabel> left_label;  // absent for beta corners
  TransitionLabel right_label;
  bool beta = false;
};

struct OracleResult {
  enum class Status { AllJoinable, NonJoinable, Inconclusive };
  Status status = Status::Inconclusive;
  std::optional<CornerWitness> witness;
  TransitionGraph graph;
  std::size_t corners_checked = 0;
};

/// Brute-force local confluence (modulo equivalence when equiv is given):
/// enumerates the reachable graph and checks joinability of every alpha (and
/// beta) corner. Inconclusive when enumeration is truncated.
OracleResult oracle_local_confluence(const std::vector<CanonState>& inits, const Program& prog,
                                     const OracleEquiv* equiv, const EnumLimits& limits);

/// Exhaustive confluence (modulo equivalence, strong formulation: wings may
/// start from any two equivalent ancestors). Used by the Newman/Huet probes.
struct GlobalConfluenceResult {
  bool complete = false;
  bool confluent = false;
  std::optional<std::pair<CanonState, CanonState>> counterexample;
};

GlobalConfluenceResult oracle_global_confluence(const std::vector<CanonState>& inits,
                                                const Program& prog, const OracleEquiv* equiv,
                                                const EnumLimits& limits);

}  // namespace chrconf
