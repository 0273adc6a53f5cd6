// CLI smoke tests: drives the installed binary end to end over temp files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "nlperim/grid.hpp"

using namespace nlperim;
namespace fs = std::filesystem;

namespace {
const std::string cli = NLPERIM_CLI_PATH;

int run(const std::string& args) {
  std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string capture(const std::string& args, const std::string& tmp) {
  std::string cmd = cli + " " + args + " > " + tmp + " 2>&1";
  std::system(cmd.c_str());
  std::ifstream in(tmp);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}
}  // namespace

TEST_CASE("cli round trip: make-kernel, perimeter, minimize, crofton, audit") {
  fs::path dir = fs::temp_directory_path() / "nlperim_cli_test";
  fs::create_directories(dir);
  std::string kj = (dir / "frac05.json").string();
  REQUIRE(run("make-kernel --family fractional --s 0.5 --dim 2 --out " + kj) == 0);

  GridGeometry g = make_world(2, 32, 1.0 / 8);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  std::string pbm = (dir / "half.pbm").string();
  write_pbm(hp, pbm);

  std::string out = capture("perimeter --set " + pbm + " --kernel " + kj +
                                " --omega ball:0,0,1 --set-id half",
                            (dir / "per.txt").string());
  CHECK(out.find("set_id,kernel_id") != std::string::npos);
  CHECK(out.find("half,") != std::string::npos);

  GridSet ones(g, 1);
  std::string ones_pbm = (dir / "ones.pbm").string();
  write_pbm(ones, ones_pbm);
  std::string mout = capture("minimize --exterior " + ones_pbm + " --kernel " + kj +
                                 " --omega ball:0,0,1 --out " + dir.string(),
                             (dir / "min.txt").string());
  CHECK(mout.find("energy=0") != std::string::npos);
  GridSet emin = read_pbm((dir / "emin.pbm").string());
  CHECK(emin.count() == g.cells());

  CHECK(run("crofton --set " + pbm + " --omega ball:0,0,1.5 --lines 2000") == 0);
  CHECK(run("audit-kernel --kernel " + kj + " --samples 200") == 0);
  CHECK(run("certify --set " + pbm + " --radius 1.0 --directions 24 --out " + dir.string()) ==
        0);
  CHECK(fs::exists(dir / "certificate.json"));

  CHECK(run("flow --kernel " + kj +
            " --tau 1e-5 --steps 3 --world 24 --cell 0.125 --init ball:0.8 --out " +
            dir.string()) == 0);
  CHECK(fs::exists(dir / "flow.csv"));
}

TEST_CASE("cli rejects bad usage with exit code 2") {
  CHECK(run("no-such-command") == 2);
  CHECK(run("perimeter --bogus-flag 1") == 2);
  CHECK(run("perimeter") == 2);  // missing required options
  fs::path dir = fs::temp_directory_path() / "nlperim_cli_test2";
  fs::create_directories(dir);
  std::string kj = (dir / "bad.json").string();
  CHECK(run("make-kernel --family fractional --s 1.5 --out " + kj) == 2);
}

TEST_CASE("written artifacts re-read bit-exactly") {
  fs::path dir = fs::temp_directory_path() / "nlperim_cli_test3";
  fs::create_directories(dir);
  GridGeometry g = make_world(2, 21, 0.31);
  GridSet s = random_set(g, 0.43, 77);
  std::string p1 = (dir / "a.pbm").string(), p2 = (dir / "b.pbm").string();
  write_pbm(s, p1);
  GridSet r = read_pbm(p1);
  write_pbm(r, p2);
  std::ifstream f1(p1), f2(p2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}
