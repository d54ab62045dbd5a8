// chrconf: confluence checker for CHR programs.
//
// Exit codes: 0 = CONFLUENT / LOCALLY_CONFLUENT, 1 = NOT_CONFLUENT,
// 2 = CANNOT_PROVE or limits exceeded, 3 = usage or parse error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "chrconf/confluence.hpp"
#include "chrconf/report.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int verdict_exit_code(chrconf::Verdict v) {
  switch (v) {
    case chrconf::Verdict::Confluent:
    case chrconf::Verdict::LocallyConfluent:
      return 0;
    case chrconf::Verdict::NotConfluent:
      return 1;
    case chrconf::Verdict::CannotProve:
      return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chrconf - confluence checker for Constraint Handling Rules"};
  app.require_subcommand(1);

  // ---- check ----
  auto* check_cmd = app.add_subcommand("check", "check a CHR program for confluence");
  std::string program_path, mode_name = "classical", spec_path, format = "text", export_dir;
  bool assume_terminating = false, audit_invariant = false;
  int join_depth = 8, split_depth = 4;
  std::size_t max_states = 10000, max_depth = 200;
  std::uint64_t seed = 1;
  check_cmd->add_option("program", program_path, "CHR source file (.chr)")->required();
  check_cmd->add_option("--mode", mode_name, "classical | invariant | mod-equiv")
      ->check(CLI::IsMember({"classical", "invariant", "mod-equiv"}));
  check_cmd->add_option("--spec", spec_path, "invariant/equivalence spec file (.cspec)");
  check_cmd->add_flag("--assume-terminating", assume_terminating,
                      "assert termination (required for a CONFLUENT verdict)");
  check_cmd->add_option("--join-depth", join_depth, "joinability search depth (default 8)");
  check_cmd->add_option("--split-depth", split_depth, "maximum nested splits (default 4)");
  check_cmd->add_option("--max-states", max_states, "state enumeration limit (default 10000)");
  check_cmd->add_option("--max-depth", max_depth, "enumeration depth limit (default 200)");
  check_cmd->add_option("--format", format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));
  check_cmd->add_option("--export-dot", export_dir, "directory for Graphviz evidence exports");
  check_cmd->add_option("--seed", seed, "sampling seed (default 1)");
  check_cmd->add_flag("--audit-invariant", audit_invariant,
                      "sample-check that rules preserve the invariant");
  std::size_t cross_check = 0;
  check_cmd->add_option("--cross-check", cross_check,
                        "run the ground oracle on N instances per corner and report agreement");

  // ---- oracle ----
  auto* oracle_cmd =
      app.add_subcommand("oracle", "brute-force local-confluence oracle on ground states");
  std::string oracle_program, inits_file, oracle_spec, oracle_format = "text", oracle_export;
  std::vector<std::string> init_texts;
  std::size_t oracle_max_states = 10000, oracle_max_depth = 200;
  oracle_cmd->add_option("program", oracle_program, "CHR source file (.chr)")->required();
  oracle_cmd->add_option("--init", init_texts,
                         "initial state as a constraint goal (repeatable)");
  oracle_cmd->add_option("--inits-file", inits_file, "file with one goal per line");
  oracle_cmd->add_option("--spec", oracle_spec,
                         "spec file; its equivalence is used for joinability modulo");
  oracle_cmd->add_option("--max-states", oracle_max_states, "state limit (default 10000)");
  oracle_cmd->add_option("--max-depth", oracle_max_depth, "depth limit (default 200)");
  oracle_cmd->add_option("--format", oracle_format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));
  oracle_cmd->add_option("--export-dot", oracle_export, "directory for graph export");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (check_cmd->parsed()) {
      chrconf::Program prog = chrconf::parse_program(read_file(program_path));
      chrconf::CheckOptions options;
      if (mode_name == "classical")
        options.mode = chrconf::CheckMode::Classical;
      else if (mode_name == "invariant")
        options.mode = chrconf::CheckMode::Invariant;
      else
        options.mode = chrconf::CheckMode::ModEquiv;
      options.assume_terminating = assume_terminating;
      options.audit_invariant = audit_invariant;
      options.limits.join_depth = join_depth;
      options.limits.split_depth = split_depth;
      options.limits.enumeration.max_states = max_states;
      options.limits.enumeration.max_depth = max_depth;
      options.limits.seed = seed;
      options.cross_check = cross_check;

      std::optional<chrconf::CheckerSpec> spec;
      if (!spec_path.empty()) spec = chrconf::parse_cspec(read_file(spec_path));
      if (options.mode != chrconf::CheckMode::Classical && !spec) {
        std::cerr << "error: --mode " << mode_name << " requires --spec\n";
        return 3;
      }

      chrconf::CheckResult result = chrconf::check(prog, spec ? &*spec : nullptr, options);
      if (format == "json")
        std::cout << chrconf::render_json(result, prog) << "\n";
      else
        std::cout << chrconf::render_text(result, prog);

      if (!export_dir.empty()) {
        std::filesystem::create_directories(export_dir);
        for (std::size_t i = 0; i < result.corners.size(); ++i) {
          write_file(export_dir + "/corner_" + std::to_string(i) + ".dot",
                     chrconf::split_tree_dot(result.corners[i].tree, prog));
        }
      }
      return verdict_exit_code(result.verdict);
    }

    // oracle
    chrconf::Program prog = chrconf::parse_program(read_file(oracle_program));
    std::vector<std::string> goals = init_texts;
    if (!inits_file.empty()) {
      std::ifstream in(inits_file);
      if (!in) throw std::runtime_error("cannot open " + inits_file);
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
          goals.push_back(line);
      }
    }
    if (goals.empty()) {
      std::cerr << "error: no initial states (use --init or --inits-file)\n";
      return 3;
    }
    std::vector<chrconf::CanonState> inits;
    for (const auto& g : goals) {
      chrconf::StateRepr repr;
      for (const chrconf::Term& atom : chrconf::parse_goal(g)) {
        if (!atom.is_var() && !atom.is_int() &&
            chrconf::builtins::supported(atom.functor(), atom.arity()))
          repr.store.push_back(atom);
        else
          repr.store.push_back(atom);
      }
      inits.push_back(chrconf::canonicalize(repr));
    }

    std::optional<chrconf::CheckerSpec> spec;
    chrconf::OracleEquiv oe;
    chrconf::OracleEquiv* oe_ptr = nullptr;
    std::optional<chrconf::MetaEngine> engine;
    if (!oracle_spec.empty()) {
      spec = chrconf::parse_cspec(read_file(oracle_spec));
      if (!spec->equivalence.empty()) {
        engine.emplace(spec->types, &spec->invariant, &spec->equivalence);
        oe.pairwise = [&engine](const chrconf::CanonState& a, const chrconf::CanonState& b) {
          return engine->equiv_ground(a, b);
        };
        oe_ptr = &oe;
      }
    }

    chrconf::EnumLimits limits{oracle_max_states, oracle_max_depth};
    chrconf::OracleResult result = chrconf::oracle_local_confluence(inits, prog, oe_ptr, limits);

    if (!oracle_export.empty()) {
      std::filesystem::create_directories(oracle_export);
      write_file(oracle_export + "/graph.dot", result.graph.to_dot(&prog));
      write_file(oracle_export + "/graph.json", result.graph.to_json(&prog));
    }

    if (oracle_format == "json") {
      std::ostringstream os;
      os << "{\n  \"states\": " << result.graph.nodes.size()
         << ",\n  \"corners_checked\": " << result.corners_checked << ",\n  \"status\": \"";
      switch (result.status) {
        case chrconf::OracleResult::Status::AllJoinable: os << "all-joinable"; break;
        case chrconf::OracleResult::Status::NonJoinable: os << "non-joinable-corner"; break;
        case chrconf::OracleResult::Status::Inconclusive: os << "inconclusive"; break;
      }
      os << "\"\n}";
      std::cout << os.str() << "\n";
    } else {
      std::cout << "states enumerated: " << result.graph.nodes.size()
                << (result.graph.truncated ? " (truncated)" : "") << "\n";
      std::cout << "final states:\n";
      for (int f : result.graph.final_states())
        std::cout << "  " << result.graph.nodes[f].key() << "\n";
      std::cout << "corners checked: " << result.corners_checked << "\n";
      switch (result.status) {
        case chrconf::OracleResult::Status::AllJoinable:
          std::cout << "all corners joinable\n";
          break;
        case chrconf::OracleResult::Status::NonJoinable:
          std::cout << "non-joinable corner found:\n";
          std::cout << "  ancestor: " << result.witness->ancestor.key() << "\n";
          std::cout << "  left:     " << result.witness->left.key() << "\n";
          std::cout << "  right:    " << result.witness->right.key() << "\n";
          break;
        case chrconf::OracleResult::Status::Inconclusive:
          std::cout << "inconclusive (limits exceeded)\n";
          break;
      }
    }
    switch (result.status) {
      case chrconf::OracleResult::Status::AllJoinable: return 0;
      case chrconf::OracleResult::Status::NonJoinable: return 1;
      case chrconf::OracleResult::Status::Inconclusive: return 2;
    }
    return 2;
  } catch (const chrconf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
