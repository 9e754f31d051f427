#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(HOSTPAR_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string model(const char* name) { return std::string("--model ") + HOSTPAR_MODEL_DIR + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / ("hostpar_cli_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("classify") {
  const Run m1 = run(model("m1.json") + " classify");
  CHECK(m1.code == 0);
  CHECK(m1.out.find("bpre_class: supercritical") != std::string::npos);
  CHECK(m1.out.find("L_trivial: true") != std::string::npos);
  const Run m2 = run("classify " + model("m2.json"));
  CHECK(m2.out.find("a_parasites_as_extinction: true") != std::string::npos);
  const Run js = run(model("m3.json") + " --format json classify");
  CHECK(js.out.find("\"thm32c_applies\": true") != std::string::npos);
}

TEST_CASE("usage and parse errors exit with 2") {
  const Run bad = run(std::string("--model ") + HOSTPAR_TEST_DATA + "/bad_norm.json classify");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("law_B") != std::string::npos);
  CHECK(run(std::string("--model ") + HOSTPAR_TEST_DATA + "/bad_syntax.json classify").code == 2);
  CHECK(run("classify").code == 2);
  CHECK(run("nosuchcommand").code == 2);
  CHECK(run(model("m1.json") + " simulate -n 3").code == 2);  // no seed
  CHECK(run(model("m1.json") + " --seed 1 mc --condition sometimes").code == 2);
}

TEST_CASE("exact") {
  const Run r = run(model("m1.json") + " exact -n 1 --k-max 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("k,probability\n0,0.25\n1,0.4\n2,0.35") != std::string::npos);
  const fs::path dir = scratch("exact");
  CHECK(run(model("m1.json") + " --out " + dir.string() + " exact -n 3 --k-max 4").code == 0);
  const std::string meta = slurp(dir / "exact.meta.json");
  CHECK(meta.find("\"overflow_mass\"") != std::string::npos);
  CHECK(meta.find("\"params_hash\"") != std::string::npos);
}

TEST_CASE("simulate with zero generations") {
  const fs::path dir = scratch("sim");
  const Run r = run(model("m1.json") + " --seed 3 --out " + dir.string() + " simulate -n 0");
  CHECK(r.code == 0);
  std::istringstream csv(slurp(dir / "simulate.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("# tool=hostpar", 0) == 0);
  CHECK(lines[2] == "0,0,1,0,0,0,1,0,1,1,1,0");
  CHECK(slurp(dir / "simulate.meta.json").find("\"seed\": 3") != std::string::npos);
}

TEST_CASE("mc is deterministic") {
  const fs::path a = scratch("mc_a"), b = scratch("mc_b");
  const std::string args = " --seed 11 mc -r 2000 -n 6 --condition survival_A_at_n";
  CHECK(run(model("m1.json") + " --workers 1 --out " + a.string() + args).code == 0);
  CHECK(run(model("m1.json") + " --workers 4 --out " + b.string() + args).code == 0);
  const std::string csv = slurp(a / "mc.csv");
  CHECK(csv == slurp(b / "mc.csv"));
  CHECK(csv.find("generation,statistic,k,estimate,ci_lo,ci_hi") != std::string::npos);
  CHECK(slurp(a / "mc.meta.json").find("\"rejection_rate\"") != std::string::npos);
}

TEST_CASE("cell-line") {
  const Run r = run(model("m1.json") + " --seed 2 cell-line -n 3 -r 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("replicate,m,type,Z,U\n0,0,A,1,\n") != std::string::npos);
}

TEST_CASE("verify with the small budget") {
  const Run r = run("verify --budget small");
  CHECK(r.code == 0);
  CHECK(r.out.find("[SKIP] 4") != std::string::npos);
  CHECK(r.out.find("[PASS] 1") != std::string::npos);
  CHECK(r.out.find("[PASS] 12") != std::string::npos);
}

TEST_CASE("verify isolates a corrupted bundled model") {
  const fs::path dir = scratch("models");
  for (const auto& e : fs::directory_iterator(HOSTPAR_MODEL_DIR)) fs::copy(e.path(), dir / e.path().filename());
  std::ofstream(dir / "gw_test.json") << "{ broken";
  const Run r = run("verify --budget small --model-dir " + dir.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("[ERROR] 6") != std::string::npos);
  CHECK(r.out.find("[PASS] 7") != std::string::npos);
  CHECK(r.out.find("[PASS] 12") != std::string::npos);
}
