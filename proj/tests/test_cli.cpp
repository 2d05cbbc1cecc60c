#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "recomb/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "recomb_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(RECOMB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return recomb::io::read_file(p); }

}  // namespace

TEST_CASE("same seed gives byte-identical CSV") {
  fs::remove_all(kScratch);
  const std::string common = "w-tail --M 2000 --seed 99 --eps 0.5,0.25";
  REQUIRE(run(common + " --threads 1 --out " + (kScratch / "a").string()) == 0);
  REQUIRE(run(common + " --threads 2 --out " + (kScratch / "b").string()) == 0);
  for (const char* f : {"w-tail.csv", "w-tail.samples.csv"})
    CHECK(slurp(kScratch / "a" / f) == slurp(kScratch / "b" / f));
  REQUIRE(run("w-tail --M 2000 --seed 100 --eps 0.5,0.25 --out " + (kScratch / "c").string()) == 0);
  CHECK(slurp(kScratch / "a" / "w-tail.samples.csv") != slurp(kScratch / "c" / "w-tail.samples.csv"));

  const auto manifest = nlohmann::json::parse(slurp(kScratch / "a" / "w-tail.manifest.json"));
  CHECK(manifest["config"]["seed"] == "99");
  CHECK(manifest["config"]["M"] == "2000");
  CHECK(manifest["rng"] == std::string(recomb::kRngAlgorithm));
  CHECK(manifest["outputs"].size() == 2);
  CHECK(manifest["outputs"][0]["fnv1a64"] ==
        recomb::io::hex64(recomb::io::fnv1a64(slurp(kScratch / "a" / "w-tail.csv"))));
  CHECK(manifest["cap_events"].size() >= 1);
}

TEST_CASE("profile-discrete columns") {
  const fs::path out = kScratch / "p";
  REQUIRE(run("profile-discrete --n 4096 --lambda -4..4 --seed 7 --out " + out.string()) == 0);
  const std::string csv = slurp(out / "profile-discrete.csv");
  CHECK(csv.rfind("lambda,s,tv_exact,phi_s,upper_bound\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("config file, overrides and environment") {
  fs::create_directories(kScratch);
  const fs::path cfg = kScratch / "run.cfg";
  recomb::io::write_file_atomic(cfg, "# fragmentation run\nn = 6\nM = 500\nseed = 3\n");
  const fs::path out = kScratch / "cfg";
  REQUIRE(run("fragmentation --config " + cfg.string() + " --M 700 --out " + out.string()) == 0);
  const auto m = nlohmann::json::parse(slurp(out / "fragmentation.manifest.json"));
  CHECK(m["config"]["n"] == "6");
  CHECK(m["config"]["M"] == "700");

  const fs::path env_out = kScratch / "env";
  const std::string env = "RECOMB_OUT_DIR=" + env_out.string() + " ";
  const int status = std::system((env + RECOMB_CLI + " fragmentation --n 3 --M 10 --seed 1 > /dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(env_out / "fragmentation.csv"));
}

TEST_CASE("exit codes") {
  const std::string out = " --out " + (kScratch / "x").string();
  CHECK(run("fragmentation --n 4 --M 10" + out) == 2);  // missing seed
  CHECK(run("fragmentation --n four --M 10 --seed 1" + out) == 2);
  CHECK(run("no-such-command") == 2);
  fs::create_directories(kScratch);
  recomb::io::write_file_atomic(kScratch / "bad.cfg", "n = 4\nbogus = 1\n");
  CHECK(run("fragmentation --config " + (kScratch / "bad.cfg").string()) == 2);
  CHECK(run("collide --n 30" + out) == 3);
  CHECK(run("martingale --t 40 --M 4 --max-leaves 1000 --seed 1" + out) == 3);
  CHECK(run("fragmentation --help") == 0);
}
