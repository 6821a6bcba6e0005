//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "molgrep/common.hpp"

using namespace molgrep;

TEST_CASE("seed derivation separates streams") {
  uint64_t a = derive_seed(42, "pages", 0);
  uint64_t b = derive_seed(42, "pages", 1);
  uint64_t c = derive_seed(42, "crops", 0);
  uint64_t d = derive_seed(43, "pages", 0);
  std::set<uint64_t> all = {a, b, c, d};
  CHECK(all.size() == 4);
  CHECK(derive_seed(42, "pages", 0) == a);
}

TEST_CASE("rng reproduces identical sequences") {
  Rng r1(7), r2(7);
  for (int i = 0; i < 100; ++i) {
    CHECK(r1.uniform() == r2.uniform());
    CHECK(r1.uniform_int(17) == r2.uniform_int(17));
  }
}

TEST_CASE("rng forks are independent of draw order") {
  Rng base(99);
  Rng f1 = base.fork("alpha", 3);
  base.uniform();
  base.uniform();
  Rng f2 = Rng(99).fork("alpha", 3);
  for (int i = 0; i < 20; ++i) CHECK(f1.uniform() == f2.uniform());
}

TEST_CASE("rng ranges") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = rng.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
    int k = rng.uniform_int(7);
    CHECK(k >= 0);
    CHECK(k < 7);
  }
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng rng(11);
  rng.shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 10);
  std::vector<int> w = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng rng2(11);
  rng2.shuffle(w);
  CHECK(v == w);
}

TEST_CASE("string helpers") {
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(strip("  x y\t\n") == "x y");
  CHECK(starts_with("image_path", "image"));
  CHECK(!starts_with("img", "image"));
}

TEST_CASE("tsv round trip") {
  Tsv t;
  t.header = {"image_path", "label"};
  t.rows = {{"a.pgm", "CCO"}, {"b.pgm", "c1ccccc1"}};
  std::filesystem::path p = std::filesystem::temp_directory_path() / "molgrep_test.tsv";
  write_tsv(p.string(), t);
  Tsv back = read_tsv(p.string());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.col("label") == 1);
  CHECK_THROWS_AS((void)back.col("missing"), Error);
  std::filesystem::remove(p);
}
