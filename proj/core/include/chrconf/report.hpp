#pragma once

#include <string>

#include "chrconf/confluence.hpp"

namespace chrconf {

/// Human-readable report; one block per corner with its split tree.
std::string render_text(const CheckResult& result, const Program& prog);

/// Machine-readable report (schema_version 1; documented in docs/).
std::string render_json(const CheckResult& result, const Program& prog);

/// Graphviz rendering of a corner's split tree with joinability paths.
std::string split_tree_dot(const SplitTree& tree, const Program& prog);

}  // namespace chrconf
