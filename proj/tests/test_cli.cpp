#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "nsasym_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(NSASYM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config() {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / "small.ini";
  std::ofstream(p) << "[grid]\ndim = 2\nN = 128\nL = 20\n"
                      "[solver]\ndt = 0.05\nt_end = 1\nt0 = 0.05\nratio = 1.5\n"
                      "[ic]\namplitude = 0.1\nseed = 3\nwidth = 1.5\n";
  return p;
}

} // namespace

TEST_CASE("usage errors exit 2") {
  const std::string cfg = write_config().string();
  CHECK(run("--version") == 0);
  CHECK(run("") == 2);
  CHECK(run("launch") == 2);
  CHECK(run("gen-ic --config /nonexistent.ini") == 2);
  CHECK(run("gen-ic --config " + cfg + " --dim 4") == 2);
  CHECK(run("gen-ic --config " + cfg + " --override grid.nope=1") == 2);
  std::ofstream(kRoot / "bad.ini") << "[grid]\nN = many\n";
  CHECK(run("gen-ic --config " + (kRoot / "bad.ini").string()) == 2);
  // analysis without a trajectory is an input problem
  CHECK(run("kcoeff --config " + cfg + " --out " + (kRoot / "empty").string()) == 2);
  CHECK(run("burgers --config " + cfg + " --out " + (kRoot / "empty").string()) == 2);
}

TEST_CASE("numerical and certificate failures exit 1") {
  const std::string cfg = write_config().string();
  // a box too small for the bump trips the boundary check
  CHECK(run("gen-ic --config " + cfg + " --override grid.L=4 --out " + (kRoot / "tiny").string()) == 1);
  const std::string out = " --out " + (kRoot / "fail").string();
  REQUIRE(run("gen-ic --config " + cfg + out) == 0);
  REQUIRE(run("simulate --config " + cfg + out) == 0);
  CHECK(run("parity --config " + cfg + out) == 0);
  CHECK(run("parity --config " + cfg + " --override expansion.parity_tol=1e-300" + out) == 1);
}

TEST_CASE("repeated runs give identical verdict JSON") {
  const std::string cfg = write_config().string();
  for (const char* dir : {"a", "b"}) {
    const std::string out = " --quiet --out " + (kRoot / dir).string();
    for (const char* cmd : {"gen-ic", "simulate", "profiles", "kcoeff", "parity"})
      CHECK(run(std::string(cmd) + " --config " + cfg + out) == 0);
  }
  for (const char* cmd : {"gen-ic", "simulate", "profiles", "kcoeff", "parity"}) {
    const std::string name = std::string(cmd) + "_verdict.json";
    const std::string a = slurp(kRoot / "a" / name);
    CHECK_FALSE(a.empty());
    CHECK_MESSAGE(a == slurp(kRoot / "b" / name), name);
  }
  CHECK(slurp(kRoot / "a" / "kcoeff.json") == slurp(kRoot / "b" / "kcoeff.json"));
  fs::remove_all(kRoot);
}
