#include "chrconf/report.hpp"

#include <sstream>

#include "json.hpp"

namespace chrconf {

namespace {

const char* status_name(SplitTree::Status s) {
  switch (s) {
    case SplitTree::Status::Joinable: return "joinable";
    case SplitTree::Status::Inconsistent: return "inconsistent";
    case SplitTree::Status::Split: return "split";
    case SplitTree::Status::Stuck: return "stuck";
  }
  return "?";
}

void render_tree_text(const SplitTree& tree, const Program& prog, int indent,
                      std::ostringstream& os) {
  std::string pad(indent * 2, ' ');
  os << pad << "- " << status_name(tree.status);
  if (tree.status == SplitTree::Status::Joinable && tree.proof) {
    os << " (" << tree.proof->left_path.size() << "+" << tree.proof->right_path.size()
       << " steps, closed by "
       << (tree.proof->closed == JoinabilityProof::Closed::Equal ? "equality" : "equivalence")
       << ")";
    auto render_path = [&](const char* side, const std::vector<JoinStep>& path) {
      if (path.empty()) return;
      os << "\n" << pad << "  " << side << ":";
      for (const JoinStep& step : path) os << " --" << step.label.to_string(&prog) << "-->";
    };
    render_path("left", tree.proof->left_path);
    render_path("right", tree.proof->right_path);
  }
  if (tree.status == SplitTree::Status::Split && tree.case_constraint)
    os << " on " << tree.case_constraint->to_string();
  if (tree.status == SplitTree::Status::Stuck && !tree.stuck_reason.empty())
    os << " (" << tree.stuck_reason << ")";
  os << "\n";
  for (const SplitTree& child : tree.children) {
    if (!child.corner.where.empty()) {
      os << pad << "  case ";
      os << child.corner.where.back().to_string() << ":\n";
    }
    render_tree_text(child, prog, indent + 2, os);
  }
}

nlohmann::json tree_json(const SplitTree& tree, const Program& prog) {
  nlohmann::json j;
  j["status"] = status_name(tree.status);
  if (tree.proof) {
    nlohmann::json proof;
    proof["closed_by"] =
        tree.proof->closed == JoinabilityProof::Closed::Equal ? "equality" : "equivalence";
    auto path_json = [&](const std::vector<JoinStep>& path) {
      nlohmann::json p = nlohmann::json::array();
      for (const JoinStep& step : path) {
        p.push_back({{"label", step.label.to_string(&prog)}, {"state", step.state.to_string()}});
      }
      return p;
    };
    proof["left_path"] = path_json(tree.proof->left_path);
    proof["right_path"] = path_json(tree.proof->right_path);
    j["proof"] = proof;
  }
  if (tree.case_constraint) j["case"] = tree.case_constraint->to_string();
  if (!tree.stuck_reason.empty()) j["stuck_reason"] = tree.stuck_reason;
  if (!tree.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const SplitTree& child : tree.children) j["children"].push_back(tree_json(child, prog));
  }
  return j;
}

const char* corner_kind_name(CriticalCorner::Kind k) {
  switch (k) {
    case CriticalCorner::Kind::Alpha: return "alpha";
    case CriticalCorner::Kind::BetaRule: return "beta-rule";
    case CriticalCorner::Kind::BetaBuiltin: return "beta-builtin";
  }
  return "?";
}

}  // namespace

std::string render_text(const CheckResult& result, const Program& prog) {
  std::ostringstream os;
  os << "verdict: " << to_string(result.verdict);
  if (result.mode == CheckMode::ModEquiv &&
      (result.verdict == Verdict::Confluent || result.verdict == Verdict::LocallyConfluent))
    os << " (modulo equivalence)";
  os << "\n";
  os << "mode: " << to_string(result.mode) << "\n";
  os << "termination asserted: " << (result.termination_asserted ? "yes" : "no") << "\n";
  os << "critical corners: " << result.corners.size() << "\n";
  for (std::size_t i = 0; i < result.corners.size(); ++i) {
    const CornerReport& r = result.corners[i];
    os << "\n[" << i << "] " << r.corner.to_string() << "\n";
    if (r.exhaustive) {
      os << "  wing closures: " << r.left_closure << " / " << r.right_closure
         << (r.wings_joinable ? " (joinable)" : " (disjoint)") << "\n";
    }
    if (r.certified_nonjoinable && r.witness_ancestor)
      os << "  non-joinable witness ancestor: " << r.witness_ancestor->key() << "\n";
    render_tree_text(r.tree, prog, 1, os);
  }
  if (!result.cross_checks.empty()) {
    os << "\noracle cross-check:\n";
    for (const CrossCheckEntry& c : result.cross_checks)
      os << "  " << c.instance << " -> " << c.oracle_status
         << (c.agrees ? "" : " (DISAGREES)") << "\n";
  }
  for (const auto& note : result.notes) os << "note: " << note << "\n";
  for (const auto& warning : result.invariant_warnings) os << "warning: " << warning << "\n";
  os << "elapsed: " << result.seconds << "s\n";
  return os.str();
}

std::string render_json(const CheckResult& result, const Program& prog) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["verdict"] = to_string(result.verdict);
  j["mode"] = to_string(result.mode);
  j["termination_asserted"] = result.termination_asserted;
  j["elapsed_seconds"] = result.seconds;
  j["corners"] = nlohmann::json::array();
  for (const CornerReport& r : result.corners) {
    nlohmann::json c;
    c["kind"] = corner_kind_name(r.corner.kind);
    c["ancestor"] = r.corner.ancestor.to_string();
    c["left"] = r.corner.left.to_string();
    c["right"] = r.corner.right.to_string();
    std::vector<std::string> where;
    for (const MetaConstraint& w : r.corner.where) where.push_back(w.to_string());
    c["where"] = where;
    if (r.corner.kind == CriticalCorner::Kind::Alpha) {
      c["rules"] = {r.corner.rule_left, r.corner.rule_right};
      std::vector<std::string> overlap;
      for (const Term& t : r.corner.overlap) overlap.push_back(t.to_string());
      c["overlap"] = overlap;
    }
    c["tree"] = tree_json(r.tree, prog);
    if (r.exhaustive) {
      c["exhaustive"] = true;
      c["wings_joinable"] = r.wings_joinable;
      c["left_closure"] = r.left_closure;
      c["right_closure"] = r.right_closure;
    }
    c["certified_nonjoinable"] = r.certified_nonjoinable;
    if (r.witness_ancestor) c["witness_ancestor"] = r.witness_ancestor->key();
    j["corners"].push_back(c);
  }
  j["cross_checks"] = nlohmann::json::array();
  for (const CrossCheckEntry& c : result.cross_checks)
    j["cross_checks"].push_back(
        {{"instance", c.instance}, {"oracle", c.oracle_status}, {"agrees", c.agrees}});
  j["notes"] = result.notes;
  j["invariant_warnings"] = result.invariant_warnings;
  return j.dump(2);
}

std::string split_tree_dot(const SplitTree& tree, const Program& prog) {
  std::ostringstream os;
  os << "digraph split_tree {\n  node [shape=box,fontname=\"monospace\"];\n";
  int counter = 0;
  std::function<int(const SplitTree&)> rec = [&](const SplitTree& t) -> int {
    int id = counter++;
    std::ostringstream label;
    label << status_name(t.status);
    if (t.case_constraint) label << "\\nsplit on " << t.case_constraint->to_string();
    if (t.proof) {
      label << "\\n";
      for (const JoinStep& s : t.proof->left_path) label << " L:" << s.label.to_string(&prog);
      for (const JoinStep& s : t.proof->right_path) label << " R:" << s.label.to_string(&prog);
      label << (t.proof->closed == JoinabilityProof::Closed::Equal ? " = " : " ~ ");
    }
    if (!t.stuck_reason.empty()) label << "\\n" << t.stuck_reason;
    os << "  n" << id << " [label=\"" << label.str() << "\"];\n";
    for (const SplitTree& child : t.children) {
      int cid = rec(child);
      os << "  n" << id << " -> n" << cid;
      if (!child.corner.where.empty())
        os << " [label=\"" << child.corner.where.back().to_string() << "\"]";
      os << ";\n";
    }
    return id;
  };
  rec(tree);
  os << "}\n";
  return os.str();
}

}  // namespace chrconf
