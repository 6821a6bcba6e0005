//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "molgrep/cli/cli.hpp"

namespace molgrep::cli {

namespace {

const std::vector<KeySpec> kGenPages = {
    {"pages", "4", "number of pages to synthesize"},
    {"width", "640", "page width in pixels"},
    {"height", "640", "page height in pixels"},
    {"density", "1", "ink density scale; 0 gives blank pages"},
    {"table_prob", "0.5", "probability a page carries a ruled grid"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kGenSeg = {
    {"pages", "8", "synthetic pages to compose"},
    {"molecules_per_page", "4", "structures placed per page"},
    {"crops_per_page", "32", "crop samples per page"},
    {"train_ratio", "0.9", "train split fraction"},
    {"page_width", "640", "page width in pixels"},
    {"page_height", "640", "page height in pixels"},
    {"table_prob", "0.5", "probability a page carries a ruled grid"},
    {"density", "1", "page ink density scale"},
    {"min_heavy", "3", "minimum heavy atoms per molecule"},
    {"max_heavy", "40", "maximum heavy atoms per molecule"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kGenMol = {
    {"count", "200", "number of image/SMILES pairs"},
    {"train_ratio", "0.9", "train split fraction"},
    {"image_side", "256", "rendered image side in pixels"},
    {"min_smiles", "21", "minimum canonical SMILES length"},
    {"max_smiles", "100", "maximum canonical SMILES length"},
    {"rgroup_prob", "0", "attachment placeholder probability"},
    {"corpus", "", "SMILES corpus path; empty generates molecules"},
    {"bond_min", "14", "bond length range low"},
    {"bond_max", "26", "bond length range high"},
    {"width_min", "1.2", "line width range low"},
    {"width_max", "2.4", "line width range high"},
    {"font_min", "1", "font scale range low"},
    {"font_max", "2", "font scale range high"},
    {"superatom_prob", "0.25", "superatom contraction probability"},
    {"hash_prob", "0.5", "hashed wedge probability"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kTrainSeg = {
    {"data", "", "seg dataset directory (required)"},
    {"steps", "500", "total optimizer steps"},
    {"batch", "8", "batch size"},
    {"lr", "1e-3", "Adam learning rate"},
    {"depth", "3", "U-Net pooling depth"},
    {"base_channels", "8", "U-Net first-level channels"},
    {"multiplier", "2", "U-Net channel multiplier"},
    {"val_every", "50", "validation cadence in steps"},
    {"val_max", "64", "validation samples per evaluation"},
    {"checkpoint_every", "100", "checkpoint cadence in steps"},
    {"resume", "", "checkpoint to resume from"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kTrainSeq = {
    {"data", "", "molecule dataset directory (required)"},
    {"steps", "500", "total optimizer steps"},
    {"batch", "8", "batch size"},
    {"lr", "1e-3", "Adam learning rate"},
    {"stages", "16n,16n,32p,32p,64p,64p", "encoder stages as channels plus p/n pooling tag"},
    {"state_dim", "128", "encoder state width (must equal hidden)"},
    {"hidden", "128", "decoder hidden width"},
    {"layers", "3", "decoder depth"},
    {"max_len", "102", "token budget per SMILES, control tokens included"},
    {"augment", "1", "train-time image augmentation on/off"},
    {"val_every", "50", "validation cadence in steps"},
    {"val_max", "16", "validation samples per evaluation"},
    {"checkpoint_every", "100", "checkpoint cadence in steps"},
    {"resume", "", "checkpoint to resume from"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kSegment = {
    {"input", "", "page PGM file or directory (required)"},
    {"checkpoint", "", "segmenter checkpoint (required)"},
    {"scales", "", "comma list of working scales; empty uses the default sweep"},
    {"threshold", "0.5", "mask probability threshold"},
    {"min_area", "100", "minimum mask component area in pixels"},
    {"line_removal", "1", "erase long straight rules before masking"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kPredict = {
    {"input", "", "crop PGM file or directory (required)"},
    {"checkpoint", "", "recognizer checkpoint (required)"},
    {"attention", "0", "write per-character attention maps"},
    {"confidence_threshold", "0.01", "minimum confidence for an ok status"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kEval = {
    {"predictions", "", "predictions TSV from predict (required)"},
    {"truth", "", "ground-truth manifest TSV (required)"},
    {"weight_bin", "50", "molecular weight bin width"},
    {"heavy_bin", "5", "heavy atom count bin width"},
    {"length_bin", "10", "SMILES length bin width"},
    {"seed", "0", "master seed"},
};

const std::vector<KeySpec> kGradCheck = {
    {"seeds", "5", "random seeds per operator"},
    {"seed", "0", "base seed"},
};

const std::map<std::string, const std::vector<KeySpec>*>& schema_table() {
  static const std::map<std::string, const std::vector<KeySpec>*> table = {
      {"gen-pages", &kGenPages},   {"gen-seg", &kGenSeg},     {"gen-mol", &kGenMol},
      {"train-seg", &kTrainSeg},   {"train-seq", &kTrainSeq}, {"segment", &kSegment},
      {"predict", &kPredict},      {"eval", &kEval},          {"grad-check", &kGradCheck},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, schema] : schema_table()) v.push_back(name);
    return v;
  }();
  return names;
}

const std::vector<KeySpec>& command_schema(const std::string& command) {
  auto it = schema_table().find(command);
  if (it == schema_table().end()) fail(Err::BadConfig, "unknown command " + command);
  return *it->second;
}

const std::string& RunConfig::gets(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) fail(Err::BadConfig, "unknown key " + key);
  return it->second;
}

int RunConfig::geti(const std::string& key) const {
  try {
    return std::stoi(gets(key));
  } catch (const std::logic_error&) {
    fail(Err::BadConfig, "key " + key + " needs an integer, got '" + gets(key) + "'");
  }
}

long long RunConfig::getll(const std::string& key) const {
  try {
    return std::stoll(gets(key));
  } catch (const std::logic_error&) {
    fail(Err::BadConfig, "key " + key + " needs an integer, got '" + gets(key) + "'");
  }
}

double RunConfig::getd(const std::string& key) const {
  try {
    return std::stod(gets(key));
  } catch (const std::logic_error&) {
    fail(Err::BadConfig, "key " + key + " needs a number, got '" + gets(key) + "'");
  }
}

bool RunConfig::getb(const std::string& key) const {
  const std::string& v = gets(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  fail(Err::BadConfig, "key " + key + " needs a boolean, got '" + v + "'");
}

uint64_t RunConfig::seed() const {
  try {
    return std::stoull(gets("seed"));
  } catch (const std::logic_error&) {
    fail(Err::BadConfig, "seed needs an unsigned integer, got '" + gets("seed") + "'");
  }
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  std::string text = read_text_file(path);
  int lineno = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++lineno;
    std::string line = strip(raw);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(Err::BadConfig, path + ":" + std::to_string(lineno) + " is not a key = value line");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty())
      fail(Err::BadConfig, path + ":" + std::to_string(lineno) + " has an empty key");
    out[key] = value;
  }
  return out;
}

RunConfig resolve_config(const std::string& command, const std::string& config_path,
                         const std::map<std::string, std::string>& overrides,
                         const std::string& out_dir, bool f64) {
  const std::vector<KeySpec>& schema = command_schema(command);
  RunConfig cfg;
  cfg.command = command;
  cfg.f64 = f64;
  cfg.out_dir = out_dir.empty() ? "runs/" + command : out_dir;
  for (const KeySpec& k : schema) cfg.values[k.name] = k.fallback;

  auto apply = [&](const std::map<std::string, std::string>& kv, const std::string& origin) {
    for (const auto& [key, value] : kv) {
      if (!cfg.values.count(key))
        fail(Err::BadConfig, origin + " sets unknown key '" + key + "' for " + command);
      cfg.values[key] = value;
    }
  };
  if (!config_path.empty()) apply(parse_config_file(config_path), config_path);
  apply(overrides, "command line");
  return cfg;
}

void write_resolved(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream os;
  os << "# resolved configuration\n";
  os << "command = " << cfg.command << "\n";
  os << "f64 = " << (cfg.f64 ? 1 : 0) << "\n";
  for (const auto& [key, value] : cfg.values) os << key << " = " << value << "\n";
  write_text_file(cfg.out_dir + "/config.resolved", os.str());
}

void run_command(const RunConfig& cfg) {
  if (cfg.command == "gen-pages") return cmd_gen_pages(cfg);
  if (cfg.command == "gen-seg") return cmd_gen_seg(cfg);
  if (cfg.command == "gen-mol") return cmd_gen_mol(cfg);
  if (cfg.command == "train-seg") return cmd_train_seg(cfg);
  if (cfg.command == "train-seq") return cmd_train_seq(cfg);
  if (cfg.command == "segment") return cmd_segment(cfg);
  if (cfg.command == "predict") return cmd_predict(cfg);
  if (cfg.command == "eval") return cmd_eval(cfg);
  if (cfg.command == "grad-check") return cmd_grad_check(cfg);
  fail(Err::BadConfig, "unknown command " + cfg.command);
}

}  // namespace molgrep::cli
