//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgrep/img/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace molgrep::img {

RasterImage resize_bilinear(const RasterImage& src, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) fail(Err::ShapeMismatch, "resize target below 1x1");
  if (src.width < 1 || src.height < 1) fail(Err::ShapeMismatch, "resize of empty image");
  if (out_w == src.width && out_h == src.height) return src;

  RasterImage out(out_w, out_h, 0.0f);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, src.height - 1);
    double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, src.width - 1);
      double wx = fx - x0;
      double top = src.at(x0, y0) * (1.0 - wx) + src.at(x1, y0) * wx;
      double bot = src.at(x0, y1) * (1.0 - wx) + src.at(x1, y1) * wx;
      out.at(x, y) = static_cast<float>(top * (1.0 - wy) + bot * wy);
    }
  }
  return out;
}

RasterImage downsample(const RasterImage& src, double factor) {
  if (factor <= 0.0 || factor > 1.0) fail(Err::ShapeMismatch, "downsample factor outside (0,1]");
  int ow = std::max(1, static_cast<int>(std::lround(src.width * factor)));
  int oh = std::max(1, static_cast<int>(std::lround(src.height * factor)));
  return resize_bilinear(src, ow, oh);
}

std::string encode_pgm(const RasterImage& img) {
  std::string out;
  char header[64];
  int n = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", img.width, img.height);
  out.assign(header, header + n);
  out.reserve(out.size() + img.size());
  for (float v : img.pixels) {
    float c = std::clamp(v, 0.0f, 1.0f);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
  }
  return out;
}

void write_pgm(const std::string& path, const RasterImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::Io, "cannot write " + path);
  std::string bytes = encode_pgm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Err::Io, "short write to " + path);
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(const std::string& bytes, size_t& pos, const std::string& origin) {
  while (pos < bytes.size()) {
    char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) fail(Err::UnreadableImage, "truncated PGM header in " + origin);
  return bytes.substr(start, pos - start);
}

}  // namespace

RasterImage decode_pgm(const std::string& bytes, const std::string& origin) {
  size_t pos = 0;
  if (next_pgm_token(bytes, pos, origin) != "P5")
    fail(Err::UnreadableImage, origin + " is not binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_pgm_token(bytes, pos, origin));
    h = std::stoi(next_pgm_token(bytes, pos, origin));
    maxval = std::stoi(next_pgm_token(bytes, pos, origin));
  } catch (const std::exception&) {
    fail(Err::UnreadableImage, "bad PGM header in " + origin);
  }
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
    fail(Err::UnreadableImage, "unsupported PGM geometry in " + origin);
  ++pos;  // single whitespace after maxval
  size_t need = static_cast<size_t>(w) * h;
  if (bytes.size() < pos + need) fail(Err::UnreadableImage, "truncated PGM data in " + origin);
  RasterImage img(w, h, 0.0f);
  for (size_t i = 0; i < need; ++i) {
    img.pixels[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) /
                    static_cast<float>(maxval);
  }
  return img;
}

RasterImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::UnreadableImage, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_pgm(ss.str(), path);
}

}  // namespace molgrep::img
