#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chrconf/term.hpp"

namespace chrconf {

/// Generalized simpagation rule: kept \ removed <=> guard | body.
/// Simplifications parse with empty kept, propagations with empty removed.
struct Rule {
  std::optional<std::string> name;
  std::vector<Term> kept;     // H1, user constraints
  std::vector<Term> removed;  // H2, user constraints
  std::vector<Term> guard;    // built-in conjunction; empty means true
  std::vector<Term> body;     // user or built-in; empty only for body "true"

  std::vector<Term> head() const;  // kept ++ removed
  std::set<std::string> head_vars() const;
  std::set<std::string> all_vars() const;
  /// Variables occurring in guard or body but not in the head.
  std::set<std::string> local_vars() const;
  std::string to_string() const;
};

struct Program {
  std::vector<Rule> rules;
  std::set<std::pair<std::string, std::size_t>> user_predicates;
  std::set<std::pair<std::string, std::size_t>> builtin_predicates;

  std::string to_string() const;
};

struct SourcePos {
  int line = 0;
  int column = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, const std::string& message)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + message),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Parses the .chr surface syntax. Every rule is normalized to generalized
/// simpagation form; built-in atoms (guards and bodies) are validated against
/// the supported fragment. Reentrant; the returned Program is immutable.
Program parse_program(const std::string& text);

/// Parses a comma-separated constraint sequence ("item(a),set([])"), as used
/// for initial states on the command line.
std::vector<Term> parse_goal(const std::string& text);

/// Renamed-apart rule instance with head variables substituted.
struct PreApplication {
  int rule_index = -1;
  Rule instance;
  std::set<std::string> local_vars;  // L: variables of instance not in its head
};

class LocalVarCaptureError : public std::runtime_error {
 public:
  explicit LocalVarCaptureError(const std::string& message) : std::runtime_error(message) {}
};

/// Builds a pre-application: fresh variant of the rule, head variables
/// substituted by sigma. sigma must bind only head variables of the variant's
/// source rule and no range term may contain a local variable of the variant;
/// violations raise LocalVarCaptureError.
PreApplication make_pre_application(const Rule& rule, int rule_index, const Subst& sigma,
                                    const std::set<std::string>& avoid);

}  // namespace chrconf
