#include "doctest.h"

#include "json.hpp"

#include "test_util.hpp"

namespace {

const std::string kCli = CXLSIM_CLI_PATH;
const std::string kRepo = CXLSIM_REPO_ROOT;

int run_in(const std::string& dir, const std::string& args) {
  return testutil::run_command("cd " + dir + " && " + kCli + " " + args +
                               " > cli_stdout.txt 2> cli_stderr.txt");
}

}  // namespace

TEST_CASE("bundled minimal config runs and writes a report") {
  testutil::TempDir dir("cli_min");
  int rc = testutil::run_command("cd " + kRepo + " && " + kCli +
                                 " run --config configs/minimal.conf --out " +
                                 dir.str("out") + " > /dev/null 2>&1");
  CHECK(rc == 0);
  std::string report = testutil::read_file(dir.str("out") + "/report.json");
  CHECK(!report.empty());
  auto j = nlohmann::json::parse(report);
  CHECK(j["totals"]["accesses"].get<uint64_t>() == 10);
}

TEST_CASE("missing trace file exits with the io code") {
  testutil::TempDir dir("cli_badtrace");
  testutil::write_file(dir.str("c.conf"), "trace_file = nonexistent.trace\n");
  CHECK(run_in(dir.str(), "run --config c.conf --out out") == 3);
}

TEST_CASE("bad config exits with the config code") {
  testutil::TempDir dir("cli_badcfg");
  testutil::write_file(dir.str("c.conf"), "core_count = 0\ntrace_file = x\n");
  CHECK(run_in(dir.str(), "run --config c.conf --out out") == 2);
  CHECK(run_in(dir.str(), "validate-config --config c.conf") == 2);

  testutil::write_file(dir.str("bogus.conf"), "no_such_key = 1\n");
  CHECK(run_in(dir.str(), "validate-config --config bogus.conf") == 2);
}

TEST_CASE("validate-config accepts the bundled recipes") {
  for (const char* name :
       {"minimal.conf", "constant_baseline.conf", "empirical_nand.conf",
        "compaction_sweep.conf", "context_switch.conf"}) {
    int rc = testutil::run_command("cd " + kRepo + " && " + kCli +
                                   " validate-config --config configs/" +
                                   std::string(name) + " > /dev/null 2>&1");
    CHECK_MESSAGE(rc == 0, name);
  }
}

TEST_CASE("overrides show up in the report's config echo") {
  testutil::TempDir dir("cli_override");
  testutil::write_file(dir.str("t.trace"), "0 0 W 0x40000040 1\n");
  testutil::write_file(dir.str("c.conf"), "trace_file = t.trace\n");
  int rc = run_in(dir.str(),
                  "run --config c.conf --out out --override compaction_mode=parallel");
  REQUIRE(rc == 0);
  auto j = nlohmann::json::parse(testutil::read_file(dir.str("out/report.json")));
  CHECK(j["config"]["compaction_mode"].get<std::string>() == "parallel");
}

TEST_CASE("gen-trace validates its spec") {
  testutil::TempDir dir("cli_gen");
  CHECK(run_in(dir.str(), "gen-trace --out t.txt --count 10 --read-ratio 2.0") == 2);
  CHECK(run_in(dir.str(), "gen-trace --out t.txt --count 10 --addr-dist sideways") == 2);
  CHECK(run_in(dir.str(), "gen-trace --out t.txt --count 100 --seed 4") == 0);
  CHECK(!testutil::read_file(dir.str("t.txt")).empty());
}

TEST_CASE("compare of a report against itself is all ones") {
  testutil::TempDir dir("cli_cmp");
  testutil::write_file(dir.str("t.trace"),
                       "0 0 W 0x40000040 1\n0 0 R 0x40000040 1\n0 0 R 0x40010000 0\n");
  testutil::write_file(dir.str("c.conf"), "trace_file = t.trace\n");
  REQUIRE(run_in(dir.str(), "run --config c.conf --out out") == 0);
  REQUIRE(run_in(dir.str(), "compare out/report.json out/report.json --out diff.json") ==
          0);
  auto j = nlohmann::json::parse(testutil::read_file(dir.str("diff.json")));
  CHECK(j["totals"]["max_core_cycle_ratio"].get<double>() == doctest::Approx(1.0));
  for (auto& [kind, vals] : j["kinds"].items())
    CHECK(vals["mean_ratio"].get<double>() == doctest::Approx(1.0));
  CHECK(j["only_in_a"].empty());
  CHECK(j["only_in_b"].empty());

  // schema mismatch
  testutil::write_file(dir.str("bad.json"), "{\"schema_version\": 77}");
  CHECK(run_in(dir.str(), "compare out/report.json bad.json") == 3);
}
