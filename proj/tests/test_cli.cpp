#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <unistd.h>

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = (env.empty() ? "" : env + " ") + std::string(CIRCLEMAP_CLI_PATH) +
                    " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data_path(const std::string& name) {
  return std::string(CIRCLEMAP_TEST_DATA) + "/" + name;
}

}  // namespace

TEST_CASE("rotnum reports the certified rational") {
  CliResult r = run_cli("rotnum --a 0.5 --b 0.7");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("rational 1/2") != std::string::npos);
}

TEST_CASE("thiele-limit reproduces the golden share") {
  CliResult r = run_cli("thiele-limit --profile " + data_path("five_votes.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0.4472135954999") != std::string::npos);
  CHECK(r.output.find("uniqueness = unique") != std::string::npos);
}

TEST_CASE("elect emits the alternating sequence") {
  CliResult r = run_cli("elect --method phragmen --profile " + data_path("ebad.json") +
                        " --seats 10");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("winners=ABABABABAB") != std::string::npos);
}

TEST_CASE("validation failures name the offending option and exit 2") {
  CliResult bad = run_cli("rotnum --a 1.5 --b 0.2");
  CHECK(bad.exit_code == 2);
  CliResult unknown = run_cli("frobnicate");
  CHECK(unknown.exit_code == 2);
  CliResult missing = run_cli("rotnum --b 0.2");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("--a") != std::string::npos);
  CliResult badpolicy = run_cli("orbit --a 0.5 --b 0.7 --policy sideways");
  CHECK(badpolicy.exit_code == 2);
  CHECK(badpolicy.output.find("--policy") != std::string::npos);
  CliResult badfile = run_cli("elect --profile " + data_path("nothere.json"));
  CHECK(badfile.exit_code == 2);
}

TEST_CASE("identical invocations give identical bytes") {
  std::string cmd = "orbit --a 0.5 --b 0.92 --x0 0.3 --n 50 --policy random --seed 99";
  CliResult a = run_cli(cmd);
  CliResult b = run_cli(cmd);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CliResult st1 = run_cli("staircase --alpha 0.1:0.7:7 --beta 0.1:0.7:7 --jobs 4");
  CliResult st2 = run_cli("staircase --alpha 0.1:0.7:7 --beta 0.1:0.7:7 --jobs 1");
  CHECK(st1.exit_code == 0);
  // thread fan-out must not change ordering or content below the header
  auto body = [](const std::string& s) { return s.substr(s.find("alpha,")); };
  CHECK(body(st1.output) == body(st2.output));
}

TEST_CASE("two-party, invariant-set, and measure commands") {
  CliResult tp = run_cli("two-party --alpha 0.4 --beta 0.3 --seats 8");
  CHECK(tp.exit_code == 0);
  CHECK(tp.output.find("pB_lo=0.5") != std::string::npos);
  CHECK(tp.output.find("predicted=ABABABAB") != std::string::npos);

  CliResult inv = run_cli("invariant-set --a 0.5 --b 0.6666666666666666 --n 1");
  CHECK(inv.exit_code == 0);
  CHECK(inv.output.find("count=2") != std::string::npos);

  CliResult emp = run_cli("measure --a 0.5 --b 0.6666666666666666 --kind empirical --n 6");
  CHECK(emp.exit_code == 0);
  CHECK(emp.output.find("value_empirical") != std::string::npos);

  // an offset in the gap between the 21/34 and 34/55 plateaus at a = 0.9:
  // the rotation number resolves to an enclosure, so the pushforward exists
  CliResult push =
      run_cli("measure --a 0.9 --b 0.6676823555732581 --kind pushforward --n 50");
  CHECK(push.exit_code == 0);
  CHECK(push.output.find("value_pushforward") != std::string::npos);

  // most offsets certify a rational rotation number; then the pushforward
  // sample is undefined and the command must refuse
  CliResult bad = run_cli("measure --a 0.5 --b 0.7 --kind pushforward --n 50");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("output files and the default-directory variable") {
  std::string dir = std::string("/tmp/circlemap_cli_test_") + std::to_string(getpid());
  REQUIRE(std::system(("mkdir -p " + dir).c_str()) == 0);
  CliResult r = run_cli("orbit --a 0.5 --b 0.7 --n 3 --out points.csv",
                        "CIRCLEMAP_OUT_DIR=" + dir);
  CHECK(r.exit_code == 0);
  std::ifstream in(dir + "/points.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line.find("circlemap") != std::string::npos);
  std::system(("rm -rf " + dir).c_str());
}

TEST_CASE("orbit and plateau output shapes") {
  CliResult orb = run_cli("orbit --a 0.5 --b 0.6666666666666666 --x0 1 --n 4");
  CHECK(orb.exit_code == 0);
  CHECK(orb.output.find("step,x,eps") != std::string::npos);
  CHECK(orb.output.find("2,0.7499999999") != std::string::npos);  // 3/4 up to ulps of b
  CliResult pl = run_cli("plateaus --a 0.5 --qmax 2");
  CHECK(pl.exit_code == 0);
  CHECK(pl.output.find("0,1,") != std::string::npos);
  CHECK(pl.output.find("1,2,") != std::string::npos);
}
