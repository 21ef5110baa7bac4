#include "support.hpp"

#include "varopt/json_io.hpp"

#include <cstdlib>
#include <sys/wait.h>

#ifndef VAROPT_CLI
#define VAROPT_CLI "varopt"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& dir) {
  const std::string cmd =
      std::string("\"") + VAROPT_CLI + "\" " + args + " > \"" + (dir / "out.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("sample and simulate write files plus manifests") {
  const auto dir = testing::scratch("cli_basic");
  REQUIRE(run("sample --n 12 --seed 4 --out " + q(dir / "s.csv"), dir) == 0);
  CHECK(fs::exists(dir / "s.csv.manifest.json"));
  const varopt::Json m = varopt::read_json_file((dir / "s.csv.manifest.json").string());
  CHECK(m["command"] == "sample");
  CHECK(m["seeds"]["seed"] == 4);
  CHECK(m.contains("timings"));
  REQUIRE(run("simulate --samples " + q(dir / "s.csv") + " --foms power,jitter --out " + q(dir / "r.csv"), dir) == 0);
  const std::string text = testing::slurp((dir / "r.csv").string());
  const std::string header = text.substr(0, text.find('\n'));
  CHECK(header.find("power") != std::string::npos);
  CHECK(header.find("jitter") != std::string::npos);
  CHECK(header.find("frequency") == std::string::npos);
}

TEST_CASE("exit codes by error category") {
  const auto dir = testing::scratch("cli_codes");
  CHECK(run("sample --n 0 --out " + q(dir / "s.csv"), dir) == 2);
  CHECK(run("sample --bogus", dir) == 2);
  CHECK(run("sample --n 5 --space " + q(dir / "missing.json") + " --out " + q(dir / "s.csv"), dir) == 3);
  std::ofstream(dir / "bad.csv") << "p01,p02\n1,2\n";
  CHECK(run("simulate --samples " + q(dir / "bad.csv") + " --out " + q(dir / "r.csv"), dir) == 3);
  REQUIRE(run("sample --n 5 --out " + q(dir / "s.csv"), dir) == 0);
  CHECK(run("simulate --samples " + q(dir / "s.csv") + " --foms --out " + q(dir / "r.csv"), dir) == 2);
  CHECK(run("mc --bundle " + q(dir / "nope") + " --out " + q(dir / "mc.json"), dir) == 3);
}

TEST_CASE("mc on the oracle reports every FoM") {
  const auto dir = testing::scratch("cli_mc");
  REQUIRE(run("mc --runs 100 --seed 2 --bins 5 --out " + q(dir / "mc.json") + " --dump-raw " + q(dir / "raw.csv"),
              dir) == 0);
  const varopt::Json r = varopt::read_json_file((dir / "mc.json").string());
  CHECK(r["kind"] == "mc_report");
  CHECK(r["foms"].size() == 4);
  CHECK(r["foms"][0]["histogram"]["counts"].size() == 5);
  CHECK(fs::exists(dir / "raw.csv"));
}

TEST_CASE("thread count does not change outputs") {
  const auto dir = testing::scratch("cli_threads");
  REQUIRE(run("sample --n 20 --seed 9 --out " + q(dir / "s.csv"), dir) == 0);
  REQUIRE(run("--threads 1 simulate --samples " + q(dir / "s.csv") + " --out " + q(dir / "a.csv"), dir) == 0);
  REQUIRE(run("--threads 3 simulate --samples " + q(dir / "s.csv") + " --out " + q(dir / "b.csv"), dir) == 0);
  CHECK(testing::slurp((dir / "a.csv").string()) == testing::slurp((dir / "b.csv").string()));
  REQUIRE(run("--threads 1 mc --runs 300 --out " + q(dir / "a.json"), dir) == 0);
  REQUIRE(run("--threads 4 mc --runs 300 --out " + q(dir / "b.json"), dir) == 0);
  CHECK(testing::slurp((dir / "a.json").string()) == testing::slurp((dir / "b.json").string()));
}
