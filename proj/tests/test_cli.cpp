#include "uavisac/scenario.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace uavisac;

namespace {

int run_cli(const std::string& args, const std::string& stdout_to = "/dev/null") {
  std::string cmd = std::string("\"") + UAVISAC_CLI_PATH + "\" " + args +
                    " > " + stdout_to + " 2> /dev/null";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::path("cli_work");
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string write_config(const Workspace& ws, const ScenarioConfig& cfg,
                         const std::string& name = "scenario.json") {
  std::ofstream out(ws.file(name), std::ios::binary);
  out << serialize(cfg);
  return ws.file(name);
}

} // namespace

TEST_CASE("cli exit codes") {
  Workspace ws;
  // bad usage: missing required options
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate --config x") == 2);
  // unreadable / unparsable config
  CHECK(run_cli("run --config " + ws.file("missing.json") + " --out " + ws.file("o")) == 3);
  {
    std::ofstream bad(ws.file("bad.json"));
    bad << "{ not json";
  }
  CHECK(run_cli("run --config " + ws.file("bad.json") + " --out " + ws.file("o")) == 3);
  // feasible parse, impossible echo floor
  ScenarioConfig cfg = testing::shrink_slots(testing::default_config(), 3);
  cfg.sensing_threshold = 1.0;
  std::string path = write_config(ws, cfg, "impossible.json");
  CHECK(run_cli("run --config " + path + " --out " + ws.file("o")) == 4);
}

TEST_CASE("cli run writes the full output set") {
  Workspace ws;
  ScenarioConfig cfg = testing::shrink_slots(testing::default_config(), 4);
  std::string path = write_config(ws, cfg);
  std::string out = ws.file("out_run");
  CHECK(run_cli("run --config " + path + " --out " + out + " --max-iters 3",
                ws.file("stdout.txt")) == 0);
  for (const char* f : {"trajectory.csv", "allocation.csv", "power.csv",
                        "iterations.csv", "report.json"})
    CHECK(fs::exists(fs::path(out) / f));
  std::string line = slurp(ws.file("stdout.txt"));
  CHECK(line.find("eta_final=") != std::string::npos);
  CHECK(line.find("termination=") != std::string::npos);

  // trajectory rows: header + N + 1 positions
  std::string traj = slurp(fs::path(out) / "trajectory.csv");
  int rows = 0;
  for (char c : traj) rows += c == '\n';
  CHECK(rows == cfg.num_slots + 2);
}

TEST_CASE("cli runs are byte-for-byte repeatable") {
  Workspace ws;
  ScenarioConfig cfg = testing::shrink_slots(testing::default_config(), 4);
  std::string path = write_config(ws, cfg);
  std::string a = ws.file("rep_a"), b = ws.file("rep_b");
  REQUIRE(run_cli("run --config " + path + " --out " + a + " --max-iters 3") == 0);
  REQUIRE(run_cli("run --config " + path + " --out " + b + " --max-iters 3") == 0);
  for (const char* f : {"trajectory.csv", "allocation.csv", "power.csv", "iterations.csv"}) {
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
  }
}

TEST_CASE("cli fit recovers a planted power law") {
  Workspace ws;
  {
    std::ofstream out(ws.file("pairs.csv"));
    out << "# samples,error\n";
    for (double v : {200.0, 800.0, 3200.0}) out << v << "," << 4.1 * std::pow(v, -0.37) << "\n";
  }
  REQUIRE(run_cli("fit --pairs " + ws.file("pairs.csv"), ws.file("fit.txt")) == 0);
  std::string text = slurp(ws.file("fit.txt"));
  double a = 0, b = 0;
  REQUIRE(std::sscanf(text.c_str(), "{\"a\": %lf, \"b\": %lf}", &a, &b) == 2);
  CHECK(a == doctest::Approx(4.1).epsilon(1e-4));
  CHECK(b == doctest::Approx(0.37).epsilon(1e-4));
}

TEST_CASE("cli sweep emits one row per value and marks infeasible points") {
  Workspace ws;
  ScenarioConfig cfg = testing::shrink_slots(testing::default_config(), 3);
  std::string path = write_config(ws, cfg);
  std::string out = ws.file("out_sweep");
  double ok1 = cfg.sensing_threshold * 0.8;
  double ok2 = cfg.sensing_threshold;
  std::ostringstream vals;
  vals << ok1 << "," << ok2 << ",1.0";
  REQUIRE(run_cli("sweep --config " + path + " --param gamma_th --values " + vals.str() +
                  " --out " + out + " --max-iters 2 --jobs 2") == 0);
  std::string csv = slurp(fs::path(out) / "sweep.csv");
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line.find("gamma_th,") == 0);
  int data_rows = 0, infeasible_rows = 0;
  while (std::getline(lines, line)) {
    ++data_rows;
    if (line.find(",infeasible,0,") != std::string::npos) ++infeasible_rows;
  }
  CHECK(data_rows == 3);
  CHECK(infeasible_rows == 1);
}

TEST_CASE("cli sweep rejects a ragged period") {
  Workspace ws;
  ScenarioConfig cfg = testing::shrink_slots(testing::default_config(), 3);
  std::string path = write_config(ws, cfg);
  CHECK(run_cli("sweep --config " + path + " --param T --values 3.5 --out " +
                ws.file("o")) == 3);
}
