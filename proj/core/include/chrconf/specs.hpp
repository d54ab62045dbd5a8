#pragma once

#include <string>
#include <vector>

#include "chrconf/meta.hpp"

namespace chrconf {

/// Parsed .cspec contents: type declarations, invariant templates, state
/// equivalence templates and optional user-declared case-split atoms.
struct CheckerSpec {
  TypeTable types;
  InvariantSpec invariant;
  EquivSpec equivalence;
  std::vector<Term> split_candidates;
};

/// Parses the .cspec format:
///   type <name> = var | const | int | list(<type>) | constraints(<pattern>) | <name> .
///   invariant <state-template> [where <constraints>] .
///   equiv <state-template> ~ <state-template> [where <constraints>] .
///   split <comparison atom> .
/// State templates are written <{atom, ... | Rest} ; builtins>, with "true"
/// (or nothing) for an empty built-in part.
CheckerSpec parse_cspec(const std::string& text);

}  // namespace chrconf
