#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "recomb/errors.hpp"
#include "recomb/estimate.hpp"
#include "recomb/io.hpp"
#include "recomb/parallel.hpp"
#include "recomb/rng.hpp"

using namespace recomb;

TEST_CASE("substreams are reproducible and distinct") {
  RandomStream a = rng_substream(42, 7), b = rng_substream(42, 7), c = rng_substream(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
  const StreamFamily fam{9, 3};
  CHECK(fam.stream(2).uniform() == fam.stream(2).uniform());
  CHECK(fam.child(1).stream(0).uniform() != fam.child(2).stream(0).uniform());
}

TEST_CASE("neighbouring substreams are uncorrelated") {
  constexpr int kDraws = 1000000;
  for (std::uint64_t id : {0ull, 1ull, 1000ull}) {
    RandomStream a = rng_substream(1234, id), b = rng_substream(1234, id + 1);
    double s = 0.0;
    for (int i = 0; i < kDraws; ++i) s += (a.uniform() - 0.5) * (b.uniform() - 0.5);
    // Var of one product is 1/144.
    const double z = s / std::sqrt(kDraws / 144.0);
    CHECK(std::abs(z) < 3.0);
  }
}

TEST_CASE("variates") {
  RandomStream r = rng_substream(5, 5);
  ScalarAccumulator u, e, spin;
  for (int i = 0; i < 200000; ++i) {
    const double x = r.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    u.add(x);
    e.add(r.exponential());
    spin.add(r.spin());
  }
  CHECK(std::abs(u.mean() - 0.5) < 4 * u.std_error());
  CHECK(std::abs(e.mean() - 1.0) < 4 * e.std_error());
  CHECK(std::abs(spin.mean()) < 4 * spin.std_error());
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}

TEST_CASE("map_tasks keeps task order and rethrows") {
  const auto out = parallel::map_tasks<int>(50, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel::map_tasks<int>(10,
                                           [](std::size_t i) -> int {
                                             if (i == 3) throw InvalidArgument("boom");
                                             return 0;
                                           }),
                  InvalidArgument);
}

TEST_CASE("doubles round-trip through text") {
  for (double x : {0.1, 1.0 / 3, 1e-300, -2.5e17, 0.0}) CHECK(io::parse_double(io::format_double(x)) == x);
  CHECK_THROWS(io::parse_double("1.5x"));
  CHECK_THROWS(io::parse_double(""));
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(io::hex64(0xabcull) == "0000000000000abc");
}

TEST_CASE("csv builder quotes text cells") {
  io::CsvBuilder csv({"a", "b"});
  csv.row({"1", "x, \"y\""});
  CHECK(csv.str() == "a,b\n1,\"x, \"\"y\"\"\"\n");
  CHECK_THROWS_AS(csv.row({"1"}), InvalidArgument);
}

TEST_CASE("measure files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "recomb_io_test";
  fs::create_directories(dir);
  const Pmf mu(2, {0.1, 0.2, 0.3, 0.4});

  io::write_file_atomic(dir / "mu.csv", io::to_csv(mu));
  CHECK(io::read_pmf(dir / "mu.csv").weights()[2] == 0.3);
  CHECK_FALSE(fs::exists(dir / "mu.csv.tmp"));

  io::write_file_atomic(dir / "mu.json", io::to_json(mu).dump());
  const Pmf back = io::read_pmf(dir / "mu.json");
  for (std::size_t x = 0; x < 4; ++x) CHECK(back[x] == mu[x]);

  io::write_file_atomic(dir / "f.json", io::to_json(wht_forward(mu)).dump());
  const Pmf from_f = io::read_pmf(dir / "f.json");
  for (std::size_t x = 0; x < 4; ++x) CHECK(std::abs(from_f[x] - mu[x]) < 1e-15);

  int n = 0;
  CHECK_THROWS(io::table_from_csv("index,value\n0,0.5\n1,0.25\n2,0.25\n", n));
  CHECK_THROWS(io::table_from_csv("i,v\n0,0.5\n1,0.5\n", n));
  CHECK_THROWS(io::read_pmf(dir / "missing.csv"));
  fs::remove_all(dir);
}
