//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "molgrep/img/raster.hpp"

using namespace molgrep;
using namespace molgrep::img;

namespace {

RasterImage gradient(int w, int h) {
  RasterImage im(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) im.at(x, y) = float(x + y) / float(w + h - 2);
  return im;
}

}  // namespace

TEST_CASE("bilinear resize at identical size is exact") {
  RasterImage im = gradient(33, 17);
  RasterImage out = resize_bilinear(im, 33, 17);
  CHECK(out.pixels == im.pixels);
}

TEST_CASE("bilinear resize of a constant image stays constant") {
  RasterImage im(40, 30, 0.25f);
  RasterImage out = resize_bilinear(im, 13, 22);
  for (float v : out.pixels) CHECK(v == doctest::Approx(0.25f).epsilon(1e-6));
}

TEST_CASE("downsample dimensions round") {
  RasterImage im = gradient(101, 57);
  RasterImage out = downsample(im, 0.13);
  CHECK(out.width == int(std::lround(101 * 0.13)));
  CHECK(out.height == int(std::lround(57 * 0.13)));
  RasterImage same = downsample(im, 1.0);
  CHECK(same.pixels == im.pixels);
}

TEST_CASE("pgm round trip is exact at 8-bit resolution") {
  RasterImage im = gradient(19, 23);
  std::filesystem::path p = std::filesystem::temp_directory_path() / "molgrep_test.pgm";
  write_pgm(p.string(), im);
  RasterImage back = read_pgm(p.string());
  REQUIRE(back.width == im.width);
  REQUIRE(back.height == im.height);
  for (size_t i = 0; i < im.pixels.size(); ++i) {
    int q = int(std::lround(im.pixels[i] * 255.0f));
    CHECK(back.pixels[i] == doctest::Approx(q / 255.0f).epsilon(1e-6));
  }
  // A second encode of the decoded image is byte-identical.
  CHECK(encode_pgm(back) == encode_pgm(read_pgm(p.string())));
  std::filesystem::remove(p);
}

TEST_CASE("pgm rejects malformed input") {
  CHECK_THROWS_AS(decode_pgm("P2 4 4 255 ...", "test"), Error);
  CHECK_THROWS_AS(decode_pgm("P5 4", "test"), Error);
}

TEST_CASE("augment preserves dimensions and is seed-deterministic") {
  RasterImage im = gradient(64, 48);
  std::vector<AugmentOp> ops = {AugmentOp::Affine, AugmentOp::Brightness, AugmentOp::Binarize,
                                AugmentOp::Perforate};
  RasterImage a = augment(im, 1234, ops);
  RasterImage b = augment(im, 1234, ops);
  CHECK(a.width == im.width);
  CHECK(a.height == im.height);
  CHECK(a.pixels == b.pixels);
  RasterImage c = augment(im, 1235, ops);
  CHECK(a.pixels != c.pixels);
}

TEST_CASE("binarize maps everything to the two poles and is idempotent") {
  RasterImage im = gradient(32, 32);
  RasterImage bin = augment(im, 7, {AugmentOp::Binarize});
  for (float v : bin.pixels) CHECK((v == 0.0f || v == 1.0f));
  RasterImage again = augment(bin, 9, {AugmentOp::Binarize});
  CHECK(again.pixels == bin.pixels);
}

TEST_CASE("augment values stay in range") {
  RasterImage im = gradient(50, 40);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RasterImage out = augment(
        im, seed, {AugmentOp::Affine, AugmentOp::Brightness, AugmentOp::Perforate});
    for (float v : out.pixels) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}
