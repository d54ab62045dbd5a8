#include <benchmark/benchmark.h>

#include "chrconf/confluence.hpp"

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

void BM_UnifySmallTerms(benchmark::State& state) {
  using namespace chrconf;
  Term a = parse_goal("f(X,g(Y,Z),[A,B|T])")[0];
  Term b = parse_goal("f(h(Q),g(Q,k(Q)),[1,2,3,4])")[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(unify(a, b));
  }
}
BENCHMARK(BM_UnifySmallTerms);

void BM_ClassicalCorners_Set(benchmark::State& state) {
  chrconf::Program prog = chrconf::parse_program(kSetProgram);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chrconf::critical_alpha_corners_classical(prog));
  }
}
BENCHMARK(BM_ClassicalCorners_Set);

void BM_CheckZigzagInvariant(benchmark::State& state) {
  chrconf::Program prog = chrconf::parse_program(kZigzagProgram);
  chrconf::CheckerSpec spec = chrconf::parse_cspec(kZigzagSpec);
  chrconf::CheckOptions options;
  options.mode = chrconf::CheckMode::Invariant;
  options.assume_terminating = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chrconf::check(prog, &spec, options));
  }
}
BENCHMARK(BM_CheckZigzagInvariant);

void BM_CheckSetModEquiv(benchmark::State& state) {
  chrconf::Program prog = chrconf::parse_program(kSetProgram);
  chrconf::CheckerSpec spec = chrconf::parse_cspec(kSetSpec);
  chrconf::CheckOptions options;
  options.mode = chrconf::CheckMode::ModEquiv;
  options.assume_terminating = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chrconf::check(prog, &spec, options));
  }
}
BENCHMARK(BM_CheckSetModEquiv);

void BM_OracleEnumerateSet(benchmark::State& state) {
  chrconf::Program prog = chrconf::parse_program(kSetProgram);
  std::string goal = "set([])";
  for (int i = 0; i < state.range(0); ++i) goal += ",item(c" + std::to_string(i) + ")";
  chrconf::StateRepr repr;
  repr.store = chrconf::parse_goal(goal);
  chrconf::CanonState init = chrconf::canonicalize(repr);
  chrconf::EnumLimits limits;
  limits.max_states = 100000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chrconf::enumerate_reachable({init}, prog, limits));
  }
}
BENCHMARK(BM_OracleEnumerateSet)->Arg(3)->Arg(5)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
