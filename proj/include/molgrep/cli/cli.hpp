//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_CLI_CLI_HPP_
#define MOLGREP_CLI_CLI_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "molgrep/data/data.hpp"
#include "molgrep/img/raster.hpp"

namespace molgrep::cli {

// One configurable key of a command, with its default value.
struct KeySpec {
  std::string name;
  std::string fallback;
  std::string help;
};

const std::vector<std::string>& command_names();
const std::vector<KeySpec>& command_schema(const std::string& command);

// Fully-resolved settings for one run: defaults, then config file values,
// then explicit overrides. Unknown keys fail with Err::BadConfig.
struct RunConfig {
  std::string command;
  std::string out_dir;
  bool f64 = false;
  std::map<std::string, std::string> values;

  const std::string& gets(const std::string& key) const;
  int geti(const std::string& key) const;
  long long getll(const std::string& key) const;
  double getd(const std::string& key) const;
  bool getb(const std::string& key) const;
  uint64_t seed() const;
};

// `key = value` lines with # comments; later duplicates win.
std::map<std::string, std::string> parse_config_file(const std::string& path);

RunConfig resolve_config(const std::string& command, const std::string& config_path,
                         const std::map<std::string, std::string>& overrides,
                         const std::string& out_dir, bool f64);

// Creates the run directory and writes config.resolved into it.
void write_resolved(const RunConfig& cfg);

// Isotropic rescale so the longer side is exactly `side`, centered on a
// white side x side canvas.
img::RasterImage normalize_crop(const img::RasterImage& crop, int side);

// Seg manifest loader (label column = mask path, resolved like image paths).
std::vector<data::SegSample> load_seg_manifest(const std::string& tsv_path);

void cmd_gen_pages(const RunConfig& cfg);
void cmd_gen_seg(const RunConfig& cfg);
void cmd_gen_mol(const RunConfig& cfg);
void cmd_train_seg(const RunConfig& cfg);
void cmd_train_seq(const RunConfig& cfg);
void cmd_segment(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_grad_check(const RunConfig& cfg);

// Dispatches on cfg.command; fails with Err::BadConfig for unknown names.
void run_command(const RunConfig& cfg);

}  // namespace molgrep::cli

#endif  // MOLGREP_CLI_CLI_HPP_
