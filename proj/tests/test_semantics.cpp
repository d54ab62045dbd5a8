#include "chrconf/state.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace chrconf;

namespace {

const char* kSetProgram = "set(L), item(A) <=> set([A|L]).\n";
const char* kZigzagProgram =
    "r1 @ p(X) <=> q(X).\n"
    "r2 @ p(X) <=> r(X).\n"
    "r3 @ q(X) <=> X > 0 | r(X).\n"
    "r4 @ r(X) <=> X =< 0 | q(X).\n";

CanonState state_of(const std::string& goal) {
  StateRepr repr;
  repr.store = parse_goal(goal);
  return canonicalize(repr);
}

CanonState state_of(const std::string& goal, const std::string& builtins) {
  StateRepr repr;
  repr.store = parse_goal(goal);
  repr.builtins = BuiltinStore().add_all(parse_goal(builtins));
  return canonicalize(repr);
}

}  // namespace

TEST_CASE("canonicalize eliminates solved equalities") {
  StateRepr repr;
  repr.store = parse_goal("p(X)");
  repr.builtins = BuiltinStore().add(parse_goal("X = a")[0]);
  CanonState s = canonicalize(repr);
  CHECK(s.store()[0].to_string() == "p(a)");
  CHECK(s.builtins().trivial());
}

TEST_CASE("canonicalize identifies variants") {
  CHECK(state_of("p(X)") == state_of("p(Y)"));
  CHECK(state_of("p(X), q(X)") == state_of("p(Y), q(Y)"));
  CHECK(state_of("p(X), q(Y)") != state_of("p(X), q(X)"));
  // Built-in-store equivalence within the fragment.
  CHECK(state_of("p(X)", "X > 0") == state_of("p(Y)", "Y >= 1"));
  // Multiset reordering.
  CHECK(state_of("item(a), item(b), set([])") == state_of("set([]), item(b), item(a)"));
}

TEST_CASE("canonicalize collapses unsatisfiable stores to failure") {
  StateRepr repr;
  repr.builtins = BuiltinStore().add_all(parse_goal("X > 0, X =< 0"));
  repr.store = parse_goal("p(X)");
  CanonState s = canonicalize(repr);
  CHECK(s.failed());
  CHECK(s == CanonState::failure());
}

TEST_CASE("successors of the set-program state absorb either item") {
  Program prog = parse_program(kSetProgram);
  auto succ = successors(state_of("item(a), item(b), set([])"), prog);
  REQUIRE(succ.size() == 2);
  std::set<std::string> keys;
  for (const Transition& t : succ) {
    CHECK(t.label.kind == TransitionLabel::Kind::RuleApp);
    keys.insert(t.to.key());
  }
  CHECK(keys.count(state_of("item(b), set([a])").key()));
  CHECK(keys.count(state_of("item(a), set([b])").key()));
}

TEST_CASE("zigzag p(0) steps only through r1 and r2") {
  Program prog = parse_program(kZigzagProgram);
  auto succ = successors(state_of("p(0)"), prog);
  REQUIRE(succ.size() == 2);
  std::set<int> rules;
  for (const Transition& t : succ) rules.insert(t.label.rule_index);
  CHECK(rules == std::set<int>{0, 1});

  // Guard entailment gates r3/r4.
  CHECK(successors(state_of("q(1)"), prog).size() == 1);
  CHECK(successors(state_of("q(0)"), prog).empty());
  CHECK(successors(state_of("r(0)"), prog).size() == 1);
  CHECK(successors(state_of("r(1)"), prog).empty());
}

TEST_CASE("pending built-ins step into the built-in store") {
  Program prog = parse_program(kSetProgram);
  auto succ = successors(state_of("X = a, p(X)"), prog);
  REQUIRE(succ.size() == 1);
  CHECK(succ[0].label.kind == TransitionLabel::Kind::Builtin);
  CHECK(succ[0].to == state_of("p(a)"));
}

TEST_CASE("no successors from failure") {
  Program prog = parse_program(kZigzagProgram);
  CHECK(successors(CanonState::failure(), prog).empty());
}

TEST_CASE("enumerate_reachable finds both set-program final states") {
  Program prog = parse_program(kSetProgram);
  TransitionGraph g = enumerate_reachable({state_of("item(a), item(b), set([])")}, prog, {});
  CHECK_FALSE(g.truncated);
  auto finals = g.final_states();
  REQUIRE(finals.size() == 2);
  std::set<std::string> keys;
  for (int f : finals) keys.insert(g.nodes[f].key());
  CHECK(keys.count(state_of("set([a,b])").key()));
  CHECK(keys.count(state_of("set([b,a])").key()));
}

TEST_CASE("enumerate_reachable on zigzag reaches the single final state") {
  Program prog = parse_program(kZigzagProgram);
  TransitionGraph g = enumerate_reachable({state_of("p(1)")}, prog, {});
  auto finals = g.final_states();
  REQUIRE(finals.size() == 1);
  CHECK(g.nodes[finals[0]] == state_of("r(1)"));
}

TEST_CASE("enumerate_reachable with an empty program yields one node") {
  Program prog = parse_program("");
  TransitionGraph g = enumerate_reachable({state_of("p(a)")}, prog, {});
  CHECK(g.nodes.size() == 1);
  CHECK(g.edges.empty());
}

TEST_CASE("enumeration reports truncation") {
  // gen(N) <=> N > 0 | gen(N - 1) is out of the term fragment; use a growing
  // store instead.
  Program prog = parse_program("grow(X) <=> grow(f(X)), extra(X).");
  EnumLimits limits;
  limits.max_states = 20;
  TransitionGraph g = enumerate_reachable({state_of("grow(a)")}, prog, limits);
  CHECK(g.truncated);
}

TEST_CASE("oracle finds the set-program non-joinable corner") {
  Program prog = parse_program(kSetProgram);
  OracleResult r =
      oracle_local_confluence({state_of("item(a), item(b), set([])")}, prog, nullptr, {});
  CHECK(r.status == OracleResult::Status::NonJoinable);
  REQUIRE(r.witness);
  CHECK(r.witness->ancestor == state_of("item(a), item(b), set([])"));
}

TEST_CASE("oracle confirms zigzag ground corners joinable") {
  Program prog = parse_program(kZigzagProgram);
  std::vector<CanonState> inits;
  for (int n = -1; n <= 2; ++n) inits.push_back(state_of("p(" + std::to_string(n) + ")"));
  OracleResult r = oracle_local_confluence(inits, prog, nullptr, {});
  CHECK(r.status == OracleResult::Status::AllJoinable);
  CHECK(r.corners_checked >= 4);
}

TEST_CASE("oracle on a single-rule program is trivially locally confluent") {
  Program prog = parse_program("p <=> q.");
  OracleResult r = oracle_local_confluence({state_of("p")}, prog, nullptr, {});
  CHECK(r.status == OracleResult::Status::AllJoinable);
  CHECK(r.corners_checked == 0);
}

TEST_CASE("oracle modulo equivalence closes the set corners") {
  Program prog = parse_program(kSetProgram);
  OracleEquiv equiv;
  // Kernel: order-insensitive rendering of set/1 arguments.
  equiv.class_key = [](const CanonState& s) {
    std::vector<std::string> parts;
    for (const Term& t : s.store()) {
      if (t.is_compound() && t.functor() == "set" && t.arity() == 1) {
        auto [items, tail] = t.args()[0].list_parts();
        std::vector<std::string> elems;
        for (const Term& e : items) elems.push_back(e.to_string());
        std::sort(elems.begin(), elems.end());
        std::string key = "set{";
        for (const auto& e : elems) key += e + ",";
        parts.push_back(key + "|" + tail.to_string() + "}");
      } else {
        parts.push_back(t.to_string());
      }
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (const auto& p : parts) out += p + ";";
    return out;
  };
  OracleResult r =
      oracle_local_confluence({state_of("item(a), item(b), set([])")}, prog, &equiv, {});
  CHECK(r.status == OracleResult::Status::AllJoinable);
}

TEST_CASE("property: canonicalization is idempotent and transition-compatible") {
  Program prog = parse_program(kSetProgram);
  testutil::Rng rng(9);
  static const char* consts[] = {"a", "b", "c", "d"};
  for (int i = 0; i < 1000; ++i) {
    // Random set-program state, then a random variant of it.
    StateRepr repr;
    int items = static_cast<int>(rng.pick(4));
    for (int k = 0; k < items; ++k)
      repr.store.push_back(Term::compound("item", {rng.chance(30)
                                                       ? Term::var("V" + std::to_string(k))
                                                       : Term::constant(consts[rng.pick(4)])}));
    if (rng.chance(70)) {
      std::vector<Term> elems;
      int len = static_cast<int>(rng.pick(3));
      for (int k = 0; k < len; ++k) elems.push_back(Term::constant(consts[rng.pick(4)]));
      repr.store.push_back(Term::compound("set", {Term::list(elems)}));
    }
    CanonState c = canonicalize(repr);

    // Idempotence.
    StateRepr again{c.store(), c.builtins()};
    CHECK(canonicalize(again) == c);

    // Variant under renaming maps to the same canonical value.
    Subst renaming;
    StateRepr variant;
    variant.store = rename_apart(repr.store, {}, &renaming);
    variant.builtins = repr.builtins.renamed(renaming);
    CHECK(canonicalize(variant) == c);

    // Transition compatibility: successors computed from any variant agree.
    auto succ1 = successors(c, prog);
    auto succ2 = successors(canonicalize(variant), prog);
    std::set<std::string> k1, k2;
    for (const Transition& t : succ1) k1.insert(t.to.key());
    for (const Transition& t : succ2) k2.insert(t.to.key());
    CHECK(k1 == k2);
  }
}

TEST_CASE("property: Newman's lemma holds on enumerable terminating systems") {
  // Random ground programs with a strictly decreasing weight measure.
  testutil::Rng rng(2024);
  int systems = 0;
  for (int round = 0; systems < 8 && round < 40; ++round) {
    static const char* preds[] = {"ca", "cb", "cc", "cd", "ce"};
    auto weight = [](int idx) { return idx + 1; };
    std::string src;
    int nrules = 2 + static_cast<int>(rng.pick(4));
    for (int k = 0; k < nrules; ++k) {
      int h1 = static_cast<int>(rng.pick(5));
      int h2 = rng.chance(60) ? static_cast<int>(rng.pick(5)) : -1;
      int wh = weight(h1) + (h2 >= 0 ? weight(h2) : 0);
      std::vector<int> body;
      int wb = 0;
      while (rng.chance(55) && body.size() < 2) {
        int b = static_cast<int>(rng.pick(5));
        if (wb + weight(b) < wh) {
          body.push_back(b);
          wb += weight(b);
        } else {
          break;
        }
      }
      src += std::string(preds[h1]);
      if (h2 >= 0) src += std::string(", ") + preds[h2];
      src += " <=> ";
      if (body.empty()) {
        src += "true";
      } else {
        for (std::size_t t = 0; t < body.size(); ++t)
          src += std::string(t ? ", " : "") + preds[body[t]];
      }
      src += ".\n";
    }
    Program prog = parse_program(src);
    std::string goal;
    int atoms = 2 + static_cast<int>(rng.pick(4));
    for (int k = 0; k < atoms; ++k) goal += std::string(k ? ", " : "") + preds[rng.pick(5)];
    CanonState init = state_of(goal);

    EnumLimits limits;
    limits.max_states = 3000;
    OracleResult local = oracle_local_confluence({init}, prog, nullptr, limits);
    if (local.status == OracleResult::Status::Inconclusive) continue;
    GlobalConfluenceResult global = oracle_global_confluence({init}, prog, nullptr, limits);
    if (!global.complete) continue;
    ++systems;
    CHECK((local.status == OracleResult::Status::AllJoinable) == global.confluent);
  }
  CHECK(systems >= 8);
}
