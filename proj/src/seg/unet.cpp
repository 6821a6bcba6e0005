//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <string>
#include <utility>
#include <vector>

#include "molgrep/seg/seg.hpp"

namespace molgrep::seg {

std::vector<std::pair<std::string, std::vector<int>>> unet_param_shapes(const UNetConfig& cfg) {
  if (cfg.depth < 1 || cfg.base_channels < 1 || cfg.multiplier < 1)
    fail(Err::BadConfig, "segmenter config fields must be positive");
  auto width = [&](int level) {
    int c = cfg.base_channels;
    for (int i = 0; i < level; ++i) c *= cfg.multiplier;
    return c;
  };

  std::vector<std::pair<std::string, std::vector<int>>> out;
  auto conv = [&](const std::string& stem, int cin, int cout) {
    out.push_back({stem + ".w", {cout, cin, 5, 5}});
    out.push_back({stem + ".b", {cout}});
    out.push_back({stem + ".alpha", {cout}});
  };

  for (int i = 0; i < cfg.depth; ++i)
    conv("down" + std::to_string(i), i == 0 ? 1 : width(i - 1), width(i));
  conv("bottom", width(cfg.depth - 1), width(cfg.depth));
  for (int i = cfg.depth - 1; i >= 0; --i) {
    std::string stem = "up" + std::to_string(i);
    out.push_back({stem + ".t", {width(i + 1), width(i), 4, 4}});
    conv(stem, 2 * width(i), width(i));
  }
  out.push_back({"head.w", {2, width(0), 5, 5}});
  out.push_back({"head.b", {2}});
  return out;
}

long long unet_param_count(const UNetConfig& cfg) {
  long long n = 0;
  for (const auto& [name, shape] : unet_param_shapes(cfg)) {
    (void)name;
    long long k = 1;
    for (int d : shape) k *= d;
    n += k;
  }
  return n;
}

std::string unet_config_echo(const UNetConfig& cfg) {
  return "unet depth=" + std::to_string(cfg.depth) + " base=" + std::to_string(cfg.base_channels) +
         " mult=" + std::to_string(cfg.multiplier);
}

UNetConfig unet_config_parse(const std::string& echo) {
  std::vector<std::string> parts = split(strip(echo), ' ');
  if (parts.empty() || parts[0] != "unet") fail(Err::BadConfig, "not a unet config echo: " + echo);
  UNetConfig cfg;
  for (size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].empty()) continue;
    std::vector<std::string> kv = split(parts[i], '=');
    if (kv.size() != 2) fail(Err::BadConfig, "malformed echo field: " + parts[i]);
    if (kv[0] == "depth") {
      cfg.depth = std::stoi(kv[1]);
    } else if (kv[0] == "base") {
      cfg.base_channels = std::stoi(kv[1]);
    } else if (kv[0] == "mult") {
      cfg.multiplier = std::stoi(kv[1]);
    } else {
      fail(Err::BadConfig, "unknown echo field: " + kv[0]);
    }
  }
  unet_param_shapes(cfg);
  return cfg;
}

std::vector<double> default_scales() {
  std::vector<double> s;
  for (int i = 10; i <= 20; ++i) s.push_back(i / 100.0);
  return s;
}

}  // namespace molgrep::seg
