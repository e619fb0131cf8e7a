#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include <fmt/format.h>

#include "ddinv/config.hpp"
#include "helpers.hpp"

using namespace ddinv;
using namespace ddinv::test;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = fmt::format("cd '{}' && '{}' {} > stdout.txt 2> stderr.txt", dir.string(), DDINV_CLI_PATH, args);
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "stdout.txt"), slurp(dir / "stderr.txt")};
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config round trip") {
  const auto dir = scratch_dir("config_rt");
  write_text(dir / "c.json", R"({"seed": 7, "delta": 0.03, "T": 200, "formulation": "thm2",
    "S": {"A": "S.csv", "b": "b.csv"}, "generation": {"disturbance_mode": "vertex"},
    "options": {"margin": true}, "sweep": {"delta_grid": {"start": 0, "stop": 0.01, "step": 0.0025}, "mode": "threshold"}})");
  const RunConfig c = RunConfig::load(dir / "c.json");
  CHECK(c.seed == 7);
  CHECK(c.T == 200);
  CHECK(c.margin);
  CHECK(c.delta_grid.size() == 5);
  CHECK(c.delta_grid.back() == 0.01);
  CHECK(c.resolve(c.S->A) == dir / "S.csv");
  const Json j = c.to_json();
  const RunConfig back = RunConfig::from_json(j, dir);
  CHECK(back.to_json() == j);
  CHECK(back.sweep_config().threshold_search);
}

TEST_CASE("config errors") {
  const auto dir = scratch_dir("config_err");
  write_text(dir / "a.json", R"({"seed": 1, "detla": 0.1})");
  try {
    RunConfig::load(dir / "a.json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("detla") != std::string::npos);
  }
  write_text(dir / "b.json", "{\n  \"seed\": 1,\n  \"T\": \n}");
  try {
    RunConfig::load(dir / "b.json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("b.json:4") != std::string::npos);
  }
  write_text(dir / "c.json", R"({"formulation": "thm3"})");
  CHECK_THROWS_AS(RunConfig::load(dir / "c.json"), ParseError);
}

TEST_CASE("simulate-data is byte-reproducible") {
  const auto dir = scratch_dir("cli_sim");
  REQUIRE(run_cli(dir, "simulate-data --out a --T 50 --seed 11 --delta 0.04").code == 0);
  REQUIRE(run_cli(dir, "simulate-data --out b --T 50 --seed 11 --delta 0.04").code == 0);
  REQUIRE(run_cli(dir, "simulate-data --out c --T 50 --seed 12 --delta 0.04").code == 0);
  for (const char* f : {"U0.csv", "X0.csv", "X1.csv", "D0.csv", "manifest.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / "X1.csv") != slurp(dir / "c" / "X1.csv"));
  CHECK(read_json(dir / "a" / "manifest.json").at("seed") == 11);
}

TEST_CASE("synthesize then verify") {
  const auto dir = scratch_dir("cli_synth");
  Run r = run_cli(dir, "synthesize --formulation thm1 --T 400 --delta 0.01 --seed 3 --out res");
  CHECK(r.code == 0);
  CHECK(r.out.find("feasible") != std::string::npos);
  r = run_cli(dir, "verify --result res --out res");
  CHECK(r.code == 0);
  CHECK(read_json(dir / "res" / "verify.json").at("passed").get<bool>());
  CHECK(read_json(dir / "res" / "result.json").at("config").at("seed") == 3);

  // The echoed config re-runs to the same status and the same data.
  const fs::path echo = dir / "res" / "echo.json";
  write_json(echo, read_json(dir / "res" / "result.json").at("config"));
  r = run_cli(dir, "synthesize --config res/echo.json --out res2");
  CHECK(r.code == 0);
  CHECK(read_json(dir / "res2" / "result.json").at("status") == "feasible");

  CHECK(run_cli(dir, "synthesize --formulation model --delta 0.07 --out inf").code == 1);
  CHECK(run_cli(dir, "verify --result inf --out inf").code == 1);
}

TEST_CASE("unbounded S exits with code 2") {
  const auto dir = scratch_dir("cli_unbounded");
  write_text(dir / "S.csv", "1,0,0\n-1,0,0\n");
  write_text(dir / "c.json", R"({"S": "S.csv", "T": 50, "delta": 0.01})");
  const Run r = run_cli(dir, "synthesize --config c.json --out o");
  CHECK(r.code == 2);
  CHECK(r.err.find("bounded") != std::string::npos);
  CHECK(r.err.find("synthesize") != std::string::npos);
}

TEST_CASE("malformed matrix file exits with code 2 and a line number") {
  const auto dir = scratch_dir("cli_badcsv");
  write_text(dir / "A.csv", "1,0,0\n0,1,oops\n0,0,1\n");
  write_text(dir / "c.json", R"({"A": "A.csv", "formulation": "model"})");
  const Run r = run_cli(dir, "synthesize --config c.json --out o");
  CHECK(r.code == 2);
  CHECK(r.err.find("A.csv:2") != std::string::npos);
  CHECK(run_cli(dir, "synthesize --formulation nope").code == 2);
  CHECK(run_cli(dir, "frobnicate").code == 2);
}

TEST_CASE("platoon demo outputs") {
  const auto dir = scratch_dir("cli_demo");
  const Run r = run_cli(dir, "platoon-demo --out demo --T 400 --delta 0.02 --seed 1");
  CHECK(r.code == 0);
  const Json s = read_json(dir / "demo" / "summary.json");
  CHECK(s.at("data_based").at("status") == "feasible");
  CHECK(s.at("data_based").at("certificates_passed").get<bool>());
  CHECK(s.at("checks_passed").get<bool>());
  CHECK(fs::exists(dir / "demo" / "trajectories" / "thm1_vertex_7.csv"));
  REQUIRE(run_cli(dir, "platoon-demo --out demo2 --T 400 --delta 0.02 --seed 1").code == 0);
  CHECK(slurp(dir / "demo" / "data" / "X1.csv") == slurp(dir / "demo2" / "data" / "X1.csv"));
  CHECK(run_cli(dir, "platoon-demo --out hot --T 400 --delta 0.07").code == 1);
}

TEST_CASE("small sweep") {
  const auto dir = scratch_dir("cli_sweep");
  write_text(dir / "c.json", R"({"sweep": {"T_grid": [200], "delta_grid": [0.0, 0.02, 0.09], "seeds": [0, 1]}, "jobs": 2})");
  const Run r = run_cli(dir, "sweep --config c.json --out sw");
  CHECK(r.code == 0);
  const std::string csv = slurp(dir / "sw" / "sweep.csv");
  CHECK(csv.rfind("T,delta,seed,status,solve_seconds", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(csv.find(",0.09,0,infeasible") != std::string::npos);
  CHECK(csv.find(",0,0,feasible") != std::string::npos);
}

}  // TEST_SUITE
