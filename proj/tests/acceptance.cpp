// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "chrconf/confluence.hpp"
#include "chrconf/report.hpp"
#include "test_util.hpp"

using namespace chrconf;

namespace {

const char* kSetProgram = "set(L), item(A) <=> set([A|L]).\n";
const char* kZigzagProgram =
    "r1 @ p(X) <=> q(X).\n"
    "r2 @ p(X) <=> r(X).\n"
    "r3 @ q(X) <=> X > 0 | r(X).\n"
    "r4 @ r(X) <=> X =< 0 | q(X).\n";
const char* kZigzagSpec =
    "invariant <{p(N)} ; true> where type(int, N).\n"
    "invariant <{q(N)} ; true> where type(int, N).\n"
    "invariant <{r(N)} ; true> where type(int, N).\n";
const char* kSetSpec =
    "type constList = list(const).\n"
    "type constItems = constraints(item(const)).\n"
    "invariant <{set(L) | S} ; true> where type(constList, L), type(constItems, S).\n"
    "equiv <{set(L1) | S} ; true> ~ <{set(L2) | S} ; true>\n"
    "  where type(constList, L1), type(constList, L2), perm(L1, L2), type(constItems, S).\n";
const char* kTwoBranchProgram = "r1 @ a <=> b.\nr2 @ a <=> c.\n";
const char* kTwoBranchSpec =
    "invariant <{a} ; true>.\n"
    "invariant <{b} ; true>.\n"
    "invariant <{c} ; true>.\n"
    "equiv <{b} ; true> ~ <{c} ; true>.\n";

int failures = 0;

void criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::cout << (ok ? "PASS" : "FAIL") << ": " << name;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << "\n";
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CanonState ground_state(const std::vector<Term>& atoms) {
  StateRepr repr;
  repr.store = atoms;
  return canonicalize(repr);
}

bool functors_are(const StateTemplate& st, std::multiset<std::string> expected) {
  std::multiset<std::string> got;
  for (const Term& t : st.store) got.insert(t.is_compound() ? t.functor() : t.name());
  return got == expected;
}

// --- Criterion 1: set program, classical mode ----------------------------
bool criterion_set_classical(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  Program prog = parse_program(kSetProgram);
  CheckOptions opts;
  opts.assume_terminating = true;
  CheckResult result = check(prog, nullptr, opts);
  double elapsed = seconds_since(t0);

  bool ok = result.verdict == Verdict::NotConfluent;
  ok = ok && result.corners.size() == 2;
  bool item_overlap = false, set_overlap = false;
  for (const CornerReport& r : result.corners) {
    ok = ok && r.exhaustive && r.certified_nonjoinable;
    if (functors_are(r.corner.ancestor, {"item", "item", "set"})) item_overlap = true;
    if (functors_are(r.corner.ancestor, {"item", "set", "set"})) set_overlap = true;
  }
  ok = ok && item_overlap && set_overlap;
  ok = ok && elapsed < 1.0;
  std::ostringstream os;
  os << "verdict " << to_string(result.verdict) << ", " << result.corners.size()
     << " corners, " << elapsed << "s";
  detail = os.str();
  return ok;
}

// --- Criterion 2: zigzag program ------------------------------------------
bool criterion_zigzag(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  Program prog = parse_program(kZigzagProgram);

  CheckOptions classical;
  classical.assume_terminating = true;
  CheckResult c = check(prog, nullptr, classical);
  bool ok = c.verdict == Verdict::NotConfluent && c.corners.size() == 1 &&
            c.corners[0].certified_nonjoinable;

  CheckerSpec spec = parse_cspec(kZigzagSpec);
  CheckOptions inv;
  inv.mode = CheckMode::Invariant;
  inv.assume_terminating = true;
  CheckResult m = check(prog, &spec, inv);
  ok = ok && m.verdict == Verdict::Confluent && m.corners.size() == 1;
  if (ok) {
    const SplitTree& tree = m.corners[0].tree;
    ok = tree.status == SplitTree::Status::Split && tree.children.size() == 2;
    // The two subcorners carry |= n>0 and |= n=<0 and close via r3 / r4 in
    // at most one step.
    std::set<std::string> case_ops;
    for (const SplitTree& child : (ok ? tree.children : std::vector<SplitTree>{})) {
      if (child.status != SplitTree::Status::Joinable || !child.proof) {
        ok = false;
        break;
      }
      const MetaConstraint& added = child.corner.where.back();
      std::string op;
      if (added.kind == MetaConstraint::Kind::Modal && added.modal.concl.size() == 1)
        op = added.modal.concl[0].functor();
      case_ops.insert(op);
      std::size_t steps = child.proof->left_path.size() + child.proof->right_path.size();
      ok = ok && steps <= 1;
      std::set<int> closing;
      for (const JoinStep& s : child.proof->left_path) closing.insert(s.label.rule_index);
      for (const JoinStep& s : child.proof->right_path) closing.insert(s.label.rule_index);
      // |= n>0 closes through r3 (index 2); |= n=<0 through r4 (index 3).
      if (op == ">")
        ok = ok && closing == std::set<int>{2};
      else if (op == "=<")
        ok = ok && closing == std::set<int>{3};
      else
        ok = false;
    }
    ok = ok && case_ops == std::set<std::string>{">", "=<"};
  }
  double elapsed = seconds_since(t0);
  ok = ok && elapsed < 1.0;
  std::ostringstream os;
  os << "classical " << to_string(c.verdict) << ", invariant " << to_string(m.verdict) << ", "
     << elapsed << "s";
  detail = os.str();
  return ok;
}

// --- Criterion 3: set program, mod-equiv ----------------------------------
bool criterion_set_mod_equiv(std::string& detail) {
  auto t0 = std::chrono::steady_clock::now();
  Program prog = parse_program(kSetProgram);
  CheckerSpec spec = parse_cspec(kSetSpec);

  MetaEngine engine(spec.types, &spec.invariant, &spec.equivalence);
  std::size_t pre_corner_alpha = critical_alpha_corners_classical(prog).size();
  auto meta_alpha = critical_alpha_corners_meta(prog, engine);
  bool ok = pre_corner_alpha == 2 && meta_alpha.size() == 1;  // two-set corner rejected

  CheckOptions opts;
  opts.mode = CheckMode::ModEquiv;
  opts.assume_terminating = true;
  CheckResult result = check(prog, &spec, opts);
  ok = ok && result.verdict == Verdict::Confluent;

  bool alpha_checked = false, beta_checked = false;
  for (const CornerReport& r : result.corners) {
    if (r.corner.kind == CriticalCorner::Kind::Alpha) {
      // Joinable modulo equivalence with one search step per wing (two-step
      // wings counted from the ancestor), closed by the perm template.
      alpha_checked = r.tree.status == SplitTree::Status::Joinable && r.tree.proof &&
                      r.tree.proof->closed == JoinabilityProof::Closed::Equiv &&
                      r.tree.proof->left_path.size() == 1 && r.tree.proof->right_path.size() == 1;
    }
    if (r.corner.kind == CriticalCorner::Kind::BetaRule) {
      bool uses_perm = false;
      for (const MetaConstraint& w : r.corner.where)
        if (w.kind == MetaConstraint::Kind::Perm) uses_perm = true;
      if (uses_perm)
        beta_checked = r.tree.status == SplitTree::Status::Joinable && r.tree.proof &&
                       r.tree.proof->closed == JoinabilityProof::Closed::Equiv;
    }
  }
  ok = ok && alpha_checked && beta_checked;
  double elapsed = seconds_since(t0);
  ok = ok && elapsed < 5.0;
  std::ostringstream os;
  os << "verdict " << to_string(result.verdict) << ", alpha+beta joinable mod equiv, " << elapsed
     << "s";
  detail = os.str();
  return ok;
}

// --- Criterion 4: oracle cross-validation ----------------------------------
struct ShippedConfig {
  std::string name;
  const char* program;
  const char* spec;  // may be null
  CheckMode mode;
};

bool criterion_oracle_cross_validation(std::string& detail) {
  testutil::Rng rng(20240808);
  static const char* consts[] = {"a", "b", "c", "d"};

  auto random_set_instance = [&](bool with_set) {
    std::vector<Term> atoms;
    if (with_set || rng.chance(70)) {
      std::vector<Term> elems;
      int len = static_cast<int>(rng.pick(3));
      for (int k = 0; k < len; ++k) elems.push_back(Term::constant(consts[rng.pick(4)]));
      atoms.push_back(Term::compound("set", {Term::list(elems)}));
    }
    int items = static_cast<int>(rng.pick(5));
    for (int k = 0; k < items && atoms.size() < 6; ++k)
      atoms.push_back(Term::compound("item", {Term::constant(consts[rng.pick(4)])}));
    return atoms;
  };
  auto random_zigzag_instance = [&](bool single) {
    std::vector<Term> atoms;
    static const char* preds[] = {"p", "q", "r"};
    int n = single ? 1 : 1 + static_cast<int>(rng.pick(3));
    for (int k = 0; k < n; ++k)
      atoms.push_back(
          Term::compound(preds[rng.pick(3)], {Term::integer(rng.pick_int(-3, 3))}));
    return atoms;
  };
  auto random_twobranch_instance = [&](bool single) {
    std::vector<Term> atoms;
    int n = single ? 1 : 1 + static_cast<int>(rng.pick(4));
    for (int k = 0; k < n; ++k) atoms.push_back(Term::constant(consts[rng.pick(3)]));
    return atoms;
  };

  std::vector<ShippedConfig> configs = {
      {"set/classical", kSetProgram, nullptr, CheckMode::Classical},
      {"set/mod-equiv", kSetProgram, kSetSpec, CheckMode::ModEquiv},
      {"zigzag/classical", kZigzagProgram, nullptr, CheckMode::Classical},
      {"zigzag/invariant", kZigzagProgram, kZigzagSpec, CheckMode::Invariant},
      {"twobranch/classical", kTwoBranchProgram, nullptr, CheckMode::Classical},
      {"twobranch/mod-equiv", kTwoBranchProgram, kTwoBranchSpec, CheckMode::ModEquiv},
  };

  int disagreements = 0;
  std::ostringstream os;
  for (const ShippedConfig& cfg : configs) {
    Program prog = parse_program(cfg.program);
    std::optional<CheckerSpec> spec;
    if (cfg.spec) spec = parse_cspec(cfg.spec);
    CheckOptions opts;
    opts.mode = cfg.mode;
    opts.assume_terminating = true;
    CheckResult verdict = check(prog, spec ? &*spec : nullptr, opts);

    std::optional<MetaEngine> engine;
    OracleEquiv equiv;
    OracleEquiv* equiv_ptr = nullptr;
    if (spec && cfg.mode == CheckMode::ModEquiv) {
      engine.emplace(spec->types, &spec->invariant, &spec->equivalence);
      equiv.pairwise = [&engine](const CanonState& a, const CanonState& b) {
        return engine->equiv_ground(a, b);
      };
      equiv_ptr = &equiv;
    }
    std::optional<MetaEngine> inv_engine;
    if (spec) inv_engine.emplace(spec->types, &spec->invariant, nullptr);

    int nonjoinable_instances = 0;
    int instances = 0;
    for (int i = 0; i < 50 || instances < 50; ++i) {
      std::vector<Term> atoms;
      bool restricted = cfg.mode != CheckMode::Classical;
      if (cfg.program == kSetProgram)
        atoms = random_set_instance(restricted);
      else if (cfg.program == kZigzagProgram)
        atoms = random_zigzag_instance(restricted);
      else
        atoms = random_twobranch_instance(restricted);
      if (atoms.empty()) continue;
      CanonState init = ground_state(atoms);
      if (restricted && inv_engine && !inv_engine->inv_holds_ground(init)) continue;
      ++instances;
      OracleResult oracle = oracle_local_confluence({init}, prog, equiv_ptr, {});
      if (oracle.status == OracleResult::Status::Inconclusive) continue;
      bool joinable_here = oracle.status == OracleResult::Status::AllJoinable;
      if (!joinable_here) ++nonjoinable_instances;
      if ((verdict.verdict == Verdict::Confluent || verdict.verdict == Verdict::LocallyConfluent) &&
          !joinable_here)
        ++disagreements;
      if (instances >= 120) break;
    }
    if (verdict.verdict == Verdict::NotConfluent) {
      // The verdict's own witness must be reproducible by the oracle.
      bool confirmed = false;
      for (const CornerReport& r : verdict.corners) {
        if (!r.certified_nonjoinable || !r.witness_ancestor) continue;
        OracleResult confirm =
            oracle_local_confluence({*r.witness_ancestor}, prog, equiv_ptr, {});
        if (confirm.status == OracleResult::Status::NonJoinable) confirmed = true;
      }
      if (!confirmed) ++disagreements;
    }
    os << cfg.name << "=" << to_string(verdict.verdict) << "(" << instances << " instances, "
       << nonjoinable_instances << " non-joinable) ";
  }
  detail = os.str() + (disagreements ? "DISAGREEMENTS: " + std::to_string(disagreements) : "");
  return disagreements == 0;
}

// --- Criterion 5: Newman / Huet probes -------------------------------------
bool criterion_newman_huet(std::string& detail) {
  testutil::Rng rng(9090);
  static const char* preds[] = {"ca", "cb", "cc", "cd", "ce"};
  int systems = 0, rounds = 0;
  while (systems < 20 && rounds < 200) {
    ++rounds;
    std::string src;
    int nrules = 2 + static_cast<int>(rng.pick(5));
    for (int k = 0; k < nrules; ++k) {
      int h1 = static_cast<int>(rng.pick(5));
      int h2 = rng.chance(60) ? static_cast<int>(rng.pick(5)) : -1;
      int wh = (h1 + 1) + (h2 >= 0 ? h2 + 1 : 0);
      std::vector<int> body;
      int wb = 0;
      while (rng.chance(55) && body.size() < 2) {
        int b = static_cast<int>(rng.pick(5));
        if (wb + b + 1 >= wh) break;
        body.push_back(b);
        wb += b + 1;
      }
      src += preds[h1];
      if (h2 >= 0) src += std::string(", ") + preds[h2];
      src += " <=> ";
      if (body.empty())
        src += "true";
      else
        for (std::size_t t = 0; t < body.size(); ++t)
          src += std::string(t ? ", " : "") + preds[body[t]];
      src += ".\n";
    }
    Program prog = parse_program(src);
    std::string goal;
    int atoms = 2 + static_cast<int>(rng.pick(5));
    for (int k = 0; k < atoms; ++k) goal += std::string(k ? ", " : "") + preds[rng.pick(5)];
    CanonState init = ground_state(parse_goal(goal));

    EnumLimits limits;
    limits.max_states = 5000;

    // Newman: exhaustive local vs global confluence.
    OracleResult local = oracle_local_confluence({init}, prog, nullptr, limits);
    GlobalConfluenceResult global = oracle_global_confluence({init}, prog, nullptr, limits);
    if (local.status == OracleResult::Status::Inconclusive || !global.complete) continue;
    if ((local.status == OracleResult::Status::AllJoinable) != global.confluent) {
      detail = "Newman disagreement on system:\n" + src;
      return false;
    }

    // Huet: the same check modulo a kernel equivalence collapsing
    // the first two predicates.
    OracleEquiv equiv;
    equiv.class_key = [](const CanonState& s) {
      std::string key = s.key();
      std::string out;
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (key.compare(i, 2, "cb") == 0) {
          out += "ca";
          ++i;
        } else {
          out += key[i];
        }
      }
      return out;
    };
    OracleResult local_mod = oracle_local_confluence({init}, prog, &equiv, limits);
    GlobalConfluenceResult global_mod = oracle_global_confluence({init}, prog, &equiv, limits);
    if (local_mod.status == OracleResult::Status::Inconclusive || !global_mod.complete) continue;
    if ((local_mod.status == OracleResult::Status::AllJoinable) != global_mod.confluent) {
      detail = "Huet disagreement on system:\n" + src;
      return false;
    }
    ++systems;
  }
  detail = std::to_string(systems) + " systems, zero disagreements";
  return systems >= 20;
}

// --- Criterion 6: simulation-soundness sampling -----------------------------
bool criterion_simulation_soundness(std::string& detail) {
  struct RunSpec {
    const char* program;
    const char* spec;
    CheckMode mode;
  };
  std::vector<RunSpec> runs = {{kZigzagProgram, kZigzagSpec, CheckMode::Invariant},
                               {kSetProgram, kSetSpec, CheckMode::ModEquiv}};
  int transitions = 0, samples_total = 0;
  for (const RunSpec& run : runs) {
    Program prog = parse_program(run.program);
    CheckerSpec spec = parse_cspec(run.spec);
    CheckOptions opts;
    opts.mode = run.mode;
    opts.assume_terminating = true;
    CheckResult result = check(prog, &spec, opts);
    MetaEngine engine(spec.types, &spec.invariant,
                      run.mode == CheckMode::ModEquiv ? &spec.equivalence : nullptr);
    for (const MetaTransition& t : result.audit.meta_transitions) {
      ++transitions;
      // Sample the source state under the target's WHERE part so fresh
      // locals are grounded too; templates come from the transition.
      MetaState source{t.from.st, t.to.where};
      auto groundings = engine.sample_groundings(source, 10, 5);
      if (groundings.size() < 10) {
        detail = "only " + std::to_string(groundings.size()) + " samples for " +
                 t.from.to_string();
        return false;
      }
      for (const Subst& sigma : groundings) {
        ++samples_total;
        CanonState from = canonicalize(drop_state(t.from.st, sigma));
        CanonState to = canonicalize(drop_state(t.to.st, sigma));
        bool satisfied = from == to;
        if (!satisfied)
          for (const Transition& ot : successors(from, prog))
            if (ot.to == to) satisfied = true;
        if (!satisfied) {
          detail = "simulation condition violated at " + from.key() + " -> " + to.key();
          return false;
        }
      }
    }
  }
  detail = std::to_string(transitions) + " meta transitions, " +
           std::to_string(samples_total) + " samples, all satisfied";
  return transitions > 0;
}

// --- Criterion 7: cover preservation of splits ------------------------------
bool criterion_cover_preservation(std::string& detail) {
  struct RunSpec {
    const char* program;
    const char* spec;
    CheckMode mode;
  };
  std::vector<RunSpec> runs = {{kZigzagProgram, kZigzagSpec, CheckMode::Invariant},
                               {kSetProgram, kSetSpec, CheckMode::ModEquiv}};
  int splits = 0;
  for (const RunSpec& run : runs) {
    Program prog = parse_program(run.program);
    CheckerSpec spec = parse_cspec(run.spec);
    CheckOptions opts;
    opts.mode = run.mode;
    opts.assume_terminating = true;
    CheckResult result = check(prog, &spec, opts);
    MetaEngine engine(spec.types, &spec.invariant,
                      run.mode == CheckMode::ModEquiv ? &spec.equivalence : nullptr);
    for (const AuditSink::SplitEvent& ev : result.audit.splits) {
      ++splits;
      // Inclusion 1: every sampled grounding of the original satisfies some
      // piece's constraint set.
      auto originals = engine.sample_groundings(ev.original, 20, 3);
      if (originals.size() < 20) {
        detail = "only " + std::to_string(originals.size()) + " original samples";
        return false;
      }
      for (const Subst& sigma : originals) {
        bool covered = false;
        for (const MetaState& piece : ev.pieces)
          if (engine.holds_ground(piece.where, sigma)) covered = true;
        if (!covered) {
          detail = "uncovered original grounding " + sigma.to_string();
          return false;
        }
      }
      // Inclusion 2: every sampled grounding of a piece satisfies the
      // original's constraint set.
      for (const MetaState& piece : ev.pieces) {
        auto piece_groundings = engine.sample_groundings(piece, 20, 29);
        if (piece_groundings.size() < 20) {
          detail = "only " + std::to_string(piece_groundings.size()) + " piece samples";
          return false;
        }
        for (const Subst& sigma : piece_groundings) {
          if (!engine.holds_ground(ev.original.where, sigma)) {
            detail = "piece grounding escapes the original";
            return false;
          }
        }
      }
    }
  }
  detail = std::to_string(splits) + " splits probed both ways";
  return splits > 0;
}

// --- Criterion 8: module property suites at 1000+ cases ---------------------
bool criterion_property_suites(std::string& detail) {
  // term-core: unifier soundness and generality.
  testutil::Rng rng(31337);
  int term_cases = 0;
  const std::vector<Term> domain = {Term::constant("a"), Term::constant("b"),
                                    Term::compound("g", {Term::constant("a")})};
  while (term_cases < 1000) {
    Term t1 = testutil::random_term(rng, 2, 2);
    Term t2 = testutil::random_term(rng, 2, 2);
    auto sigma = unify(t1, t2);
    if (sigma) {
      if (!(sigma->apply(t1) == sigma->apply(t2))) {
        detail = "unifier unsound on " + t1.to_string() + " / " + t2.to_string();
        return false;
      }
    }
    // Generality against enumerated ground unifiers.
    std::vector<std::string> vars;
    t1.collect_vars(vars);
    t2.collect_vars(vars);
    if (vars.size() <= 3) {
      std::vector<std::size_t> idx(vars.size(), 0);
      bool more = true;
      while (more) {
        Subst theta;
        for (std::size_t k = 0; k < vars.size(); ++k) theta.compose_bind(vars[k], domain[idx[k]]);
        if (theta.apply(t1) == theta.apply(t2)) {
          if (!sigma) {
            detail = "missed unifier for " + t1.to_string() + " / " + t2.to_string();
            return false;
          }
          Subst delta;
          for (const auto& v : vars) {
            if (!match_extend(delta, sigma->apply(Term::var(v)), theta.apply(Term::var(v)))) {
              detail = "ground unifier does not factor through the mgu";
              return false;
            }
          }
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == domain.size()) idx[k++] = 0;
        more = !idx.empty() && k < idx.size();
      }
    }
    ++term_cases;
  }

  // builtin-theory: monotonicity and add-commutativity.
  int monotone_cases = 0, commute_cases = 0;
  static const char* vars2[] = {"X", "Y", "Z"};
  auto random_cmp = [&]() {
    static const char* ops[] = {"<", "=<", ">", ">="};
    return Term::compound(ops[rng.pick(4)],
                          {Term::var(vars2[rng.pick(3)]),
                           rng.chance(50) ? Term::integer(rng.pick_int(-3, 3))
                                          : Term(Term::var(vars2[rng.pick(3)]))});
  };
  while (monotone_cases < 1000) {
    std::vector<Term> base{random_cmp(), random_cmp()};
    std::vector<Term> goal{random_cmp()};
    BuiltinStore b = BuiltinStore().add_all(base);
    ++monotone_cases;
    if (b.entails({}, goal) != Trivalent::Yes) continue;
    std::vector<Term> stronger = base;
    stronger.push_back(random_cmp());
    BuiltinStore bp = BuiltinStore().add_all(stronger);
    if (bp.satisfiable() && bp.entails({}, goal) != Trivalent::Yes) {
      detail = "monotonicity violation";
      return false;
    }
  }
  while (commute_cases < 1000) {
    std::vector<Term> atoms;
    int n = 2 + static_cast<int>(rng.pick(3));
    for (int k = 0; k < n; ++k) {
      if (rng.chance(30))
        atoms.push_back(Term::compound(
            "=", {Term::var(vars2[rng.pick(3)]), testutil::random_term(rng, 1, 3)}));
      else
        atoms.push_back(random_cmp());
    }
    BuiltinStore fwd = BuiltinStore().add_all(atoms);
    std::vector<Term> rev(atoms.rbegin(), atoms.rend());
    BuiltinStore bwd = BuiltinStore().add_all(rev);
    if (fwd.satisfiable() != bwd.satisfiable() ||
        (fwd.satisfiable() && !fwd.equivalent(bwd, Subst()))) {
      detail = "add is order-dependent on " + to_string(atoms);
      return false;
    }
    ++commute_cases;
  }

  // semantics: canonicalize / transition compatibility.
  Program prog = parse_program(kSetProgram);
  static const char* consts[] = {"a", "b", "c", "d"};
  int semantics_cases = 0;
  while (semantics_cases < 1000) {
    StateRepr repr;
    int items = static_cast<int>(rng.pick(4));
    for (int k = 0; k < items; ++k)
      repr.store.push_back(Term::compound(
          "item", {rng.chance(30) ? Term::var("V" + std::to_string(k))
                                  : Term::constant(consts[rng.pick(4)])}));
    if (rng.chance(70)) {
      std::vector<Term> elems;
      int len = static_cast<int>(rng.pick(3));
      for (int k = 0; k < len; ++k) elems.push_back(Term::constant(consts[rng.pick(4)]));
      repr.store.push_back(Term::compound("set", {Term::list(elems)}));
    }
    CanonState c = canonicalize(repr);
    StateRepr again{c.store(), c.builtins()};
    if (!(canonicalize(again) == c)) {
      detail = "canonicalization not idempotent";
      return false;
    }
    Subst renaming;
    StateRepr variant;
    variant.store = rename_apart(repr.store, {}, &renaming);
    variant.builtins = repr.builtins.renamed(renaming);
    CanonState cv = canonicalize(variant);
    if (!(cv == c)) {
      detail = "variants canonicalize differently";
      return false;
    }
    std::set<std::string> k1, k2;
    for (const Transition& t : successors(c, prog)) k1.insert(t.to.key());
    for (const Transition& t : successors(cv, prog)) k2.insert(t.to.key());
    if (k1 != k2) {
      detail = "successor sets differ across variants";
      return false;
    }
    ++semantics_cases;
  }

  detail = std::to_string(term_cases) + " term cases, " + std::to_string(monotone_cases) + "+" +
           std::to_string(commute_cases) + " builtin cases, " + std::to_string(semantics_cases) +
           " semantics cases";
  return true;
}

}  // namespace

int main() {
  criterion("Example 1/4: set program classical (2 corners, NOT_CONFLUENT, <1s)",
            criterion_set_classical);
  criterion("Example 5/6: zigzag classical + invariant split proof (<1s)", criterion_zigzag);
  criterion("Example 7: set program mod-equiv (invariant rejection, perm closure, <5s)",
            criterion_set_mod_equiv);
  criterion("Oracle cross-validation on shipped programs (>=50 ground instances each)",
            criterion_oracle_cross_validation);
  criterion("Newman/Huet probes on >=20 generated terminating systems",
            criterion_newman_huet);
  criterion("Simulation-soundness sampling (>=10 concretizations per meta transition)",
            criterion_simulation_soundness);
  criterion("Cover preservation of every split (>=20 samples, both inclusions)",
            criterion_cover_preservation);
  criterion("Property suites at >=1000 generated cases per module",
            criterion_property_suites);

  if (failures == 0) {
    std::cout << "acceptance: all criteria passed\n";
    return 0;
  }
  std::cout << "acceptance: " << failures << " criteria failed\n";
  return 1;
}
