#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("PCL_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "PCL_CLI must point at the command-line binary");
  std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  for (;;) {
    std::size_t got = std::fread(buf, 1, sizeof buf, pipe);
    if (got == 0) break;
    r.out.append(buf, got);
  }
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json parse_envelope(const RunResult& r) {
  auto env = nlohmann::json::parse(r.out);
  REQUIRE(env.contains("artifact"));
  REQUIRE(env.contains("command"));
  REQUIRE(env.contains("config"));
  REQUIRE(env.contains("result"));
  CHECK(env["artifact"]["name"] == "primecluster");
  CHECK(env["artifact"].contains("version"));
  return env;
}

std::filesystem::path temp_csv(const char* stem) {
  return std::filesystem::temp_directory_path() / stem;
}

}  // namespace

TEST_CASE("admissible command emits the envelope and verdict") {
  RunResult r = run_cli("admissible --tuple '1 0;1 2'");
  CHECK(r.exit_code == 0);
  auto env = parse_envelope(r);
  CHECK(env["command"] == "admissible");
  CHECK(env["config"]["tuple"] == "1 0;1 2");
  CHECK(env["result"]["admissible"] == true);

  RunResult bad = run_cli("admissible --tuple '1 1;2 1;4 3'");
  CHECK(bad.exit_code == 0);  // a clean negative verdict, not an error
  auto bad_env = parse_envelope(bad);
  CHECK(bad_env["result"]["admissible"] == false);
}

TEST_CASE("usage and domain failures exit with code 2") {
  CHECK(run_cli("admissible --tuple '1'").exit_code == 2);        // parse error
  CHECK(run_cli("admissible --no-such-flag").exit_code == 2);     // CLI usage
  CHECK(run_cli("nonsense-command").exit_code == 2);              // unknown subcommand
  CHECK(run_cli("scan-strings --x 1e3 --q 4 --a 2").exit_code == 2);  // gcd(a, q) > 1
}

TEST_CASE("singular command reports the twin constant scale") {
  RunResult r = run_cli("singular --tuple '1 0;1 2'");
  REQUIRE(r.exit_code == 0);
  auto env = parse_envelope(r);
  double value = env["result"]["value"].get<double>();
  CHECK(value > 1.3202);
  CHECK(value < 1.3205);
  CHECK(env["result"].contains("tail_log_bound"));
  CHECK(env["result"].contains("truncation_prime"));
}

TEST_CASE("string scans are byte-deterministic") {
  std::string args = "scan-strings --x 1e5 --q 4 --a 1 --m 2";
  RunResult a = run_cli(args);
  RunResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  auto env = parse_envelope(a);
  CHECK(env["result"]["count"] == 714);
}

TEST_CASE("interval scans write their csv sidecar") {
  auto path = temp_csv("pcl_cli_intervals.csv");
  std::filesystem::remove(path);
  RunResult r = run_cli("scan-intervals --lo 90 --x 120 --y 14 --threshold 5 --csv " +
                        path.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "x0,count");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 6);
  std::filesystem::remove(path);
}

TEST_CASE("extraction runs clean and reports its points") {
  RunResult r = run_cli("verify extract --tuple '1 0;1 2' --x 1e4 --r-exp 0.12 --rho 0.01 --m 1");
  REQUIRE(r.exit_code == 0);
  auto env = parse_envelope(r);
  CHECK(env["result"]["violations"] == 0);
  CHECK(env["result"]["extracted_count"] == 137);
}

TEST_CASE("timing fields appear only on request") {
  RunResult bare = run_cli("verify s1 --tuple '1 0;1 2' --x 1e4 --r-exp 0.12");
  REQUIRE(bare.exit_code == 0);
  auto env = parse_envelope(bare);
  CHECK(!env["result"].contains("runtime"));
  RunResult timed = run_cli("verify s1 --tuple '1 0;1 2' --x 1e4 --r-exp 0.12 --timing");
  auto timed_env = parse_envelope(timed);
  CHECK(timed_env["result"].contains("runtime"));
}

TEST_CASE("envelope lands in a file under --out") {
  auto path = temp_csv("pcl_cli_out.json");
  std::filesystem::remove(path);
  RunResult r = run_cli("admissible --tuple '1 0;1 2' --out " + path.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  auto env = nlohmann::json::parse(ss.str());
  CHECK(env["result"]["admissible"] == true);
  std::filesystem::remove(path);
}

TEST_CASE("mixed-kind equidistribution scans refuse a csv target") {
  auto path = temp_csv("pcl_cli_bv.csv");
  RunResult r = run_cli("bv --tuple '1 0;1 2' --x 1e4 --q 25 --kind both --csv " + path.string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("selfcheck passes end to end") {
  RunResult r = run_cli("selfcheck");
  CHECK(r.exit_code == 0);
  auto env = parse_envelope(r);
  CHECK(env["result"]["all_pass"] == true);
}
