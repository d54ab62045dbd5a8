#include "chrconf/program.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace chrconf;

TEST_CASE("parses the set rule into generalized simpagation form") {
  Program prog = parse_program("set(L), item(A) <=> set([A|L]).");
  REQUIRE(prog.rules.size() == 1);
  const Rule& r = prog.rules[0];
  CHECK(r.kept.empty());
  REQUIRE(r.removed.size() == 2);
  CHECK(r.removed[0].functor() == "set");
  CHECK(r.removed[1].functor() == "item");
  CHECK(r.guard.empty());
  REQUIRE(r.body.size() == 1);
  CHECK(r.body[0].to_string() == "set([A|L])");
  CHECK(prog.user_predicates.count({"set", 1}));
  CHECK(prog.user_predicates.count({"item", 1}));
}

TEST_CASE("parses named rules with guards") {
  Program prog = parse_program("r3 @ q(X) <=> X>0 | r(X).");
  REQUIRE(prog.rules.size() == 1);
  const Rule& r = prog.rules[0];
  CHECK(r.name == std::optional<std::string>("r3"));
  REQUIRE(r.guard.size() == 1);
  CHECK(r.guard[0].to_string() == "X>0");
  CHECK(r.removed.size() == 1);
  CHECK(prog.builtin_predicates.count({">", 2}));
}

TEST_CASE("parses simpagation and propagation heads") {
  Program prog = parse_program(
      "k(X) \\ d(X) <=> b(X).\n"
      "p(X) ==> q(X).\n");
  REQUIRE(prog.rules.size() == 2);
  CHECK(prog.rules[0].kept.size() == 1);
  CHECK(prog.rules[0].removed.size() == 1);
  CHECK(prog.rules[1].kept.size() == 1);
  CHECK(prog.rules[1].removed.empty());
}

TEST_CASE("body true is permitted and elided") {
  Program prog = parse_program("p(X) <=> true.");
  CHECK(prog.rules[0].body.empty());
}

TEST_CASE("grammar edge cases are rejected with positions") {
  CHECK_THROWS_AS(parse_program("p(X) ==> ."), ParseError);          // empty body
  CHECK_THROWS_AS(parse_program("<=> q(X)."), ParseError);           // empty head
  CHECK_THROWS_AS(parse_program("p(X) <=> q(X)"), ParseError);       // missing '.'
  CHECK_THROWS_AS(parse_program("X = Y <=> true."), ParseError);     // built-in head
  CHECK_THROWS_AS(parse_program("p(X) <=> foo(X) | q(X)."), ParseError);  // unknown guard
  CHECK_THROWS_AS(parse_program("p(X,Y,Z) <=> X+Y < Z | q(X)."), ParseError);  // fragment
  try {
    parse_program("p(X) <=>\n q(X,).");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.pos().line == 2);
  }
}

TEST_CASE("builtin directives are validated") {
  CHECK_NOTHROW(parse_program(":- builtin =/2.\np(X) <=> q(X)."));
  CHECK_THROWS_AS(parse_program(":- builtin foo/3."), ParseError);
}

TEST_CASE("parse then pretty-print then parse is a fixpoint") {
  const char* sources[] = {
      "set(L), item(A) <=> set([A|L]).",
      "r1 @ p(X) <=> q(X).\nr3 @ q(X) <=> X>0 | r(X).",
      "k(X) \\ d(X,Y) <=> X =< Y | out(X).",
      "gen ==> item(a), item(b).",
      "p(X) <=> q(X,Y).",
  };
  for (const char* src : sources) {
    Program p1 = parse_program(src);
    std::string printed = p1.to_string();
    Program p2 = parse_program(printed);
    CHECK(p2.to_string() == printed);
  }
}

TEST_CASE("property: generated rules round-trip through the printer") {
  testutil::Rng rng(5);
  auto random_atom = [&](int arity_max) {
    static const char* preds[] = {"p", "q", "s"};
    std::vector<Term> args;
    int arity = 1 + static_cast<int>(rng.pick(static_cast<std::size_t>(arity_max)));
    for (int i = 0; i < arity; ++i) args.push_back(testutil::random_term(rng, 1, 3));
    return Term::compound(preds[rng.pick(3)], args);
  };
  for (int i = 0; i < 300; ++i) {
    Rule r;
    int heads = 1 + static_cast<int>(rng.pick(2));
    for (int h = 0; h < heads; ++h) r.removed.push_back(random_atom(2));
    if (rng.chance(40)) r.kept.push_back(random_atom(2));
    if (rng.chance(50))
      r.guard.push_back(Term::compound("=<", {Term::var("X"), Term::integer(rng.pick_int(-3, 3))}));
    r.body.push_back(random_atom(2));
    Program p1;
    p1.rules.push_back(r);
    std::string printed = p1.to_string();
    Program p2 = parse_program(printed);
    CHECK(p2.to_string() == printed);
  }
}

TEST_CASE("parser rejects noise without crashing") {
  testutil::Rng rng(17);
  const char* fragments[] = {"p(X)", "<=>", "|", ",", ".", "q(", ")", "]", "[", "@", "\\", "0",
                             "=<", "foo"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    int pieces = 1 + static_cast<int>(rng.pick(8));
    for (int k = 0; k < pieces; ++k) {
      text += fragments[rng.pick(std::size(fragments))];
      text += " ";
    }
    try {
      Program p = parse_program(text);
      (void)p;
    } catch (const ParseError&) {
      // rejection with a position is the expected outcome for most inputs
    }
  }
}

TEST_CASE("make_pre_application instantiates head variables") {
  Program prog = parse_program("p(X) <=> q(X).");
  Subst sigma;
  sigma.compose_bind("X", Term::integer(0));
  PreApplication pre = make_pre_application(prog.rules[0], 0, sigma, {});
  CHECK(pre.instance.removed[0].to_string() == "p(0)");
  CHECK(pre.instance.body[0].to_string() == "q(0)");
  CHECK(pre.local_vars.empty());
}

TEST_CASE("make_pre_application renames apart with empty substitution") {
  Program prog = parse_program("q(X) <=> X>0 | r(X).");
  PreApplication pre = make_pre_application(prog.rules[0], 0, Subst(), {"X"});
  REQUIRE(pre.instance.removed.size() == 1);
  Term arg = pre.instance.removed[0].args()[0];
  REQUIRE(arg.is_var());
  CHECK(arg.name() != "X");
  CHECK(pre.instance.guard[0].args()[0] == arg);  // consistent renaming
  CHECK(pre.local_vars.empty());
}

TEST_CASE("make_pre_application rejects local-variable capture") {
  Program prog = parse_program("p(X) <=> q(X,Y).");
  const Rule& r = prog.rules[0];
  CHECK(r.local_vars() == std::set<std::string>{"Y"});
  Subst capture;
  capture.compose_bind("X", Term::compound("f", {Term::var("Y")}));
  CHECK_THROWS_AS(make_pre_application(r, 0, capture, {}), LocalVarCaptureError);
  Subst nonhead;
  nonhead.compose_bind("Y", Term::integer(1));
  CHECK_THROWS_AS(make_pre_application(r, 0, nonhead, {}), LocalVarCaptureError);
}

TEST_CASE("parse_goal reads comma-separated constraints") {
  std::vector<Term> goal = parse_goal("item(a), item(b), set([])");
  REQUIRE(goal.size() == 3);
  CHECK(goal[2].to_string() == "set([])");
  CHECK_THROWS_AS(parse_goal("p(X) q"), ParseError);
}
