//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdio>
#include <filesystem>

#include "molgrep/cli/cli.hpp"

namespace molgrep::cli {

namespace fs = std::filesystem;

void cmd_gen_pages(const RunConfig& cfg) {
  write_resolved(cfg);
  fs::create_directories(fs::path(cfg.out_dir) / "outputs");
  int pages = cfg.geti("pages");
  if (pages < 1) fail(Err::BadConfig, "pages must be at least 1");
  uint64_t seed = cfg.seed();
  double table_prob = cfg.getd("table_prob");

  Tsv index;
  index.header = {"page", "table"};
  for (int i = 0; i < pages; ++i) {
    data::PageStyle style;
    style.density = cfg.getd("density");
    Rng prng(derive_seed(seed, "pagecfg", static_cast<uint64_t>(i)));
    style.table = prng.bernoulli(table_prob);
    img::RasterImage page =
        data::synth_page(derive_seed(seed, "page", static_cast<uint64_t>(i)), cfg.geti("width"),
                         cfg.geti("height"), style);
    char name[32];
    std::snprintf(name, sizeof name, "outputs/page%04d.pgm", i);
    img::write_pgm((fs::path(cfg.out_dir) / name).string(), page);
    index.rows.push_back({name, style.table ? "1" : "0"});
  }
  write_tsv(cfg.out_dir + "/outputs/pages.tsv", index);
}

void cmd_gen_seg(const RunConfig& cfg) {
  write_resolved(cfg);
  data::SegDatasetOptions opt;
  opt.pages = cfg.geti("pages");
  opt.molecules_per_page = cfg.geti("molecules_per_page");
  opt.crops_per_page = cfg.geti("crops_per_page");
  opt.seed = cfg.seed();
  opt.train_ratio = cfg.getd("train_ratio");
  opt.page_width = cfg.geti("page_width");
  opt.page_height = cfg.geti("page_height");
  opt.table_prob = cfg.getd("table_prob");
  opt.density = cfg.getd("density");
  opt.mol.min_heavy = cfg.geti("min_heavy");
  opt.mol.max_heavy = cfg.geti("max_heavy");
  data::write_seg_dataset(opt, cfg.out_dir + "/outputs");
}

void cmd_gen_mol(const RunConfig& cfg) {
  write_resolved(cfg);
  data::MolDatasetOptions opt;
  opt.count = cfg.geti("count");
  opt.seed = cfg.seed();
  opt.train_ratio = cfg.getd("train_ratio");
  opt.image_side = cfg.geti("image_side");
  opt.min_smiles = cfg.geti("min_smiles");
  opt.max_smiles = cfg.geti("max_smiles");
  opt.rgroup_prob = cfg.getd("rgroup_prob");
  opt.corpus_path = cfg.gets("corpus");
  opt.style.bond_min = cfg.getd("bond_min");
  opt.style.bond_max = cfg.getd("bond_max");
  opt.style.width_min = cfg.getd("width_min");
  opt.style.width_max = cfg.getd("width_max");
  opt.style.font_min = cfg.geti("font_min");
  opt.style.font_max = cfg.geti("font_max");
  opt.style.superatom_prob = cfg.getd("superatom_prob");
  opt.style.hash_prob = cfg.getd("hash_prob");
  data::make_mol_dataset(opt, cfg.out_dir + "/outputs");
}

}  // namespace molgrep::cli
