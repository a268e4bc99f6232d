// End-to-end tests of the CLI binary: exit codes, report output, artifacts.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "nls/scenario.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(NLS_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int rc = pclose(pipe);
  return {WEXITSTATUS(rc), out};
}

}  // namespace

TEST_CASE("catalog --list prints the eight scenarios") {
  const auto r = run("catalog --list");
  CHECK(r.exit_code == 0);
  int lines = 0;
  for (char c : r.output)
    if (c == '\n') ++lines;
  CHECK(lines == 8);
  CHECK(r.output.find("eq19") != std::string::npos);
}

TEST_CASE("check passes on catalog scenarios") {
  const auto r = run("check --catalog case3 --param alpha=0.5");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"exit_status\": 0") != std::string::npos);

  const auto hd = run("check --catalog hd-case1 --param n=2");
  CHECK(hd.exit_code == 0);
}

TEST_CASE("check fails with the overridden potential") {
  const auto r = run("check --catalog case1 --set-coeff v=x^2");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("\"max_abs\": 4.0") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("check --catalog nosuch").exit_code == 2);
  CHECK(run("check").exit_code == 2);
  CHECK(run("check --catalog case1 --scenario foo.json").exit_code == 2);
  CHECK(run("construct --g 0 --c1 1 --c2 1 --grid 0.5:3:101,0:1:3").exit_code == 2);
  CHECK(run("catalog").exit_code == 2);
}

TEST_CASE("NLS_TOL tightens the default tolerance") {
  const auto r = run("check --catalog case4", "NLS_TOL=1e-30");
  CHECK(r.exit_code == 1);
  const auto ok = run("check --catalog case4", "NLS_TOL=1e-6");
  CHECK(ok.exit_code == 0);
}

TEST_CASE("construct emits scenario, grid and report artifacts") {
  const std::string dir = "/tmp/nls_cli_construct";
  std::filesystem::remove_all(dir);
  const auto r = run("construct --g x --c1 1 --c2 1 --grid 0.5:3:401,0:1:5 --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(dir + "/scenario.json"));
  CHECK(std::filesystem::exists(dir + "/v.csv"));
  CHECK(std::filesystem::exists(dir + "/report.json"));

  // the emitted scenario is loadable and passes check
  const auto chk = run("check --scenario " + dir + "/scenario.json --tol 1e-6");
  CHECK(chk.exit_code == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("construct reproduces the named families") {
  const auto r = run("construct --g 1 --c1 1 --c2 \"exp(0.3*t)\" --grid -5:5:201,0:1:5");
  CHECK(r.exit_code == 0);
}

TEST_CASE("map on the eq19 gauge") {
  const std::string dir = "/tmp/nls_cli_map";
  std::filesystem::remove_all(dir);
  const auto r = run("map --gauge eq19 --Q sn --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pde-candidate") != std::string::npos);
  CHECK(std::filesystem::exists(dir + "/psi.csv"));
  std::filesystem::remove_all(dir);

  // a profile that does not solve the homogeneous equation is rejected
  const auto bad = run("map --gauge eq19 --Q \"sin(x)\"");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("homogeneous-q") != std::string::npos);
}

TEST_CASE("lax subcommand with the builtin instance and with a file") {
  CHECK(run("lax --catalog case1 --akns --lambda 1").exit_code == 0);

  // a perturbed auxiliary set from a file must fail
  nls::LaxFunctions L = nls::akns_case1(1.0);
  L.g6.re = L.g6.re + nls::Expr::constant(0.1);
  const std::string path = "/tmp/nls_cli_lax.json";
  std::ofstream(path) << nls::lax_functions_to_json(L);
  const auto r = run("lax --catalog case1 --laxfns " + path);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("lax-eq3") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("simulate reports the error against the analytic solution") {
  const auto r = run("simulate --catalog case1 --dt 1e-3 --T 0.05");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("linf_error_vs_ref") != std::string::npos);
  CHECK(run("simulate --catalog case2 --dt 1e-3 --T 0.05").exit_code == 2);  // no psi_ref
}

TEST_CASE("simulate can emit a convergence table") {
  const std::string dir = "/tmp/nls_cli_conv";
  std::filesystem::remove_all(dir);
  const auto r =
      run("simulate --catalog case1 --dt 5e-3 --T 0.1 --refinements 2 --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("observed_order_1") != std::string::npos);
  std::ifstream in(dir + "/convergence.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "dx,dt,l_inf,l2,observed_order,anomaly");
  std::filesystem::remove_all(dir);
}

TEST_CASE("check --catalog all aggregates") {
  const auto r = run("check --catalog all --jobs 4");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("all catalog scenarios pass") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs modulo wall time") {
  auto strip_wall = [](std::string s) {
    const auto pos = s.find("\"wall_time_s\"");
    if (pos != std::string::npos) {
      const auto end = s.find('\n', pos);
      s.erase(pos, end - pos);
    }
    return s;
  };
  const auto a = run("check --catalog case5");
  const auto b = run("check --catalog case5");
  CHECK(strip_wall(a.output) == strip_wall(b.output));
}
