#include <cstdio>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(CHRCONF_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buffer[4096];
  while (std::size_t n = fread(buffer, 1, sizeof buffer, pipe)) output.append(buffer, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string sample(const std::string& name) { return std::string(SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST_CASE("check: set program classical is NOT_CONFLUENT with two corners") {
  RunResult r = run("check " + sample("set.chr") + " --mode classical --assume-terminating");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("NOT_CONFLUENT") != std::string::npos);
  CHECK(r.output.find("critical corners: 2") != std::string::npos);
}

TEST_CASE("check: zigzag invariant mode is CONFLUENT") {
  RunResult r = run("check " + sample("zigzag.chr") + " --mode invariant --spec " +
                    sample("zigzag.cspec") + " --assume-terminating");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verdict: CONFLUENT") != std::string::npos);
}

TEST_CASE("check: set program mod-equiv is CONFLUENT modulo equivalence") {
  RunResult r = run("check " + sample("set.chr") + " --mode mod-equiv --spec " +
                    sample("set.cspec") + " --assume-terminating");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("CONFLUENT (modulo equivalence)") != std::string::npos);
}

TEST_CASE("check: without --assume-terminating the verdict is LOCALLY_CONFLUENT") {
  RunResult r = run("check " + sample("zigzag.chr") + " --mode invariant --spec " +
                    sample("zigzag.cspec"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("LOCALLY_CONFLUENT") != std::string::npos);
}

TEST_CASE("check: JSON and text verdicts agree and the JSON parses") {
  RunResult text = run("check " + sample("zigzag.chr") + " --mode invariant --spec " +
                       sample("zigzag.cspec") + " --assume-terminating");
  RunResult json = run("check " + sample("zigzag.chr") + " --mode invariant --spec " +
                       sample("zigzag.cspec") + " --assume-terminating --format json");
  CHECK(json.exit_code == text.exit_code);
  auto parsed = nlohmann::json::parse(json.output);
  CHECK(parsed["schema_version"] == 1);
  CHECK(parsed["verdict"] == "CONFLUENT");
  CHECK(text.output.find("verdict: CONFLUENT") != std::string::npos);
  CHECK(parsed["corners"].size() == 1);
  CHECK(parsed["corners"][0]["tree"]["status"] == "split");
}

TEST_CASE("check: deterministic output for a fixed seed") {
  std::string args = "check " + sample("set.chr") + " --mode mod-equiv --spec " +
                     sample("set.cspec") + " --assume-terminating --format json --seed 7";
  auto strip_elapsed = [](std::string s) {
    auto j = nlohmann::json::parse(s);
    j.erase("elapsed_seconds");
    return j.dump();
  };
  RunResult a = run(args);
  RunResult b = run(args);
  CHECK(strip_elapsed(a.output) == strip_elapsed(b.output));
}

TEST_CASE("check: usage and parse errors exit with 3") {
  CHECK(run("check " + sample("zigzag.chr") + " --mode invariant").exit_code == 3);  // no spec
  CHECK(run("check /nonexistent.chr").exit_code == 3);
  CHECK(run("check " + sample("set.chr") + " --mode bogus").exit_code == 3);
  CHECK(run("bogus-subcommand").exit_code == 3);
}

TEST_CASE("check: --export-dot writes split-tree evidence") {
  std::string dir = "/tmp/chrconf_dot_test";
  RunResult r = run("check " + sample("zigzag.chr") + " --mode invariant --spec " +
                    sample("zigzag.cspec") + " --assume-terminating --export-dot " + dir);
  CHECK(r.exit_code == 0);
  FILE* f = fopen((dir + "/corner_0.dot").c_str(), "r");
  REQUIRE(f != nullptr);
  char buffer[64];
  std::size_t n = fread(buffer, 1, sizeof buffer, f);
  fclose(f);
  CHECK(std::string(buffer, n).find("digraph") != std::string::npos);
}

TEST_CASE("oracle: set program finals from the Example-1 query") {
  RunResult r = run("oracle " + sample("set.chr") + " --init \"item(a),item(b),set([])\"");
  CHECK(r.exit_code == 1);  // the plain oracle finds the non-joinable corner
  CHECK(r.output.find("set([a,b])") != std::string::npos);
  CHECK(r.output.find("set([b,a])") != std::string::npos);
  CHECK(r.output.find("non-joinable corner") != std::string::npos);
}

TEST_CASE("oracle: set program modulo the shipped equivalence is clean") {
  RunResult r = run("oracle " + sample("set.chr") + " --init \"item(a),item(b),set([])\" --spec " +
                    sample("set.cspec"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("all corners joinable") != std::string::npos);
}

TEST_CASE("oracle: zigzag instances are locally confluent") {
  RunResult r = run("oracle " + sample("zigzag.chr") +
                    " --init \"p(-1)\" --init \"p(0)\" --init \"p(1)\" --init \"p(2)\"");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("all corners joinable") != std::string::npos);
}

TEST_CASE("oracle: an empty init list is a usage error") {
  RunResult r = run("oracle " + sample("set.chr"));
  CHECK(r.exit_code == 3);
}

TEST_CASE("oracle: truncation exits with 2") {
  RunResult r = run("oracle " + sample("set.chr") +
                    " --init \"item(a),item(b),item(c),set([])\" --max-states 2");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("inconclusive") != std::string::npos);
}

TEST_CASE("oracle: graph export renders dot and json") {
  std::string dir = "/tmp/chrconf_oracle_export";
  RunResult r = run("oracle " + sample("zigzag.chr") + " --init \"p(1)\" --export-dot " + dir);
  CHECK(r.exit_code == 0);
  FILE* f = fopen((dir + "/graph.dot").c_str(), "r");
  REQUIRE(f != nullptr);
  fclose(f);
  f = fopen((dir + "/graph.json").c_str(), "r");
  REQUIRE(f != nullptr);
  fclose(f);
}
