//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "molgrep/chem/smiles.hpp"
#include "molgrep/data/data.hpp"

namespace molgrep::data {

namespace fs = std::filesystem;

namespace {

struct Prepared {
  chem::MolGraph mol;
  std::string smiles;
};

// Salt-stripped canonical form inside the length window, or nothing.
std::optional<Prepared> prepare(const std::string& raw, int min_len, int max_len) {
  try {
    chem::MolGraph m = chem::strip_salts(chem::parse_smiles(raw));
    std::string s = chem::write_canonical(m);
    int n = static_cast<int>(s.size());
    if (n < min_len || n > max_len) return std::nullopt;
    return Prepared{chem::parse_smiles(s), std::move(s)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

RasterImage render_sample(const chem::MolGraph& mol, const MolStyleRanges& st, int side,
                          uint64_t seed) {
  Rng rng(derive_seed(seed, "style"));
  render::RenderStyle style;
  style.bond_length = rng.uniform(st.bond_min, st.bond_max);
  style.line_width = rng.uniform(st.width_min, st.width_max);
  style.font_scale = st.font_min + rng.uniform_int(st.font_max - st.font_min + 1);
  style.superatom_prob = st.superatom_prob;
  style.wedge = rng.bernoulli(st.hash_prob) ? render::WedgeStyle::Hash
                                            : render::WedgeStyle::Triangle;
  render::Layout2D layout = render::generate_layout(mol, rng.next());
  return render::rasterize_fit(mol, layout, style, side, side, rng.next()).image;
}

DatasetManifest split_records(std::vector<ManifestRecord> records, double train_ratio) {
  size_t train_n = static_cast<size_t>(
      std::floor(static_cast<double>(records.size()) * train_ratio + 1e-9));
  DatasetManifest man;
  for (size_t i = 0; i < records.size(); ++i)
    (i < train_n ? man.train : man.val).push_back(std::move(records[i]));
  return man;
}

void write_manifests(const std::string& out_dir, const DatasetManifest& man) {
  for (const char* name : {"train.tsv", "val.tsv"}) {
    Tsv t;
    t.header = {"image_path", "label"};
    const auto& recs = std::string(name) == "train.tsv" ? man.train : man.val;
    for (const ManifestRecord& r : recs) t.rows.push_back({r.image_path, r.label});
    write_tsv(out_dir + "/" + name, t);
  }
}

}  // namespace

DatasetManifest make_mol_dataset(const MolDatasetOptions& opt, const std::string& out_dir) {
  if (opt.count < 1) fail(Err::BadConfig, "dataset count must be at least 1");
  if (opt.train_ratio < 0.0 || opt.train_ratio > 1.0)
    fail(Err::BadConfig, "train ratio must lie in [0,1]");
  if (opt.image_side < 64) fail(Err::BadConfig, "image side must be at least 64");
  if (opt.min_smiles < 1 || opt.max_smiles < opt.min_smiles)
    fail(Err::BadConfig, "bad SMILES length window");
  if (opt.style.bond_max < opt.style.bond_min || opt.style.bond_min < 3.0 ||
      opt.style.width_max < opt.style.width_min || opt.style.font_max < opt.style.font_min ||
      opt.style.font_min < 1)
    fail(Err::BadConfig, "bad style ranges");

  fs::create_directories(fs::path(out_dir) / "images");

  bool corpus = !opt.corpus_path.empty();
  std::vector<std::string> lines;
  size_t cursor = 0;
  if (corpus) lines = chem::read_smiles_lines(opt.corpus_path);

  std::vector<ManifestRecord> records;
  records.reserve(static_cast<size_t>(opt.count));
  for (int i = 0; i < opt.count; ++i) {
    std::optional<Prepared> got;
    RasterImage image;
    uint64_t img_seed = derive_seed(opt.seed, "img", static_cast<uint64_t>(i));
    if (corpus) {
      while (cursor < lines.size() && !got) {
        std::optional<Prepared> p = prepare(lines[cursor++], opt.min_smiles, opt.max_smiles);
        if (!p) continue;
        try {
          image = render_sample(p->mol, opt.style, opt.image_side, img_seed);
          got = std::move(p);
        } catch (const Error&) {
        }
      }
      if (!got)
        fail(Err::CorpusExhausted, opt.corpus_path + " supplied only " + std::to_string(i) +
                                       " of " + std::to_string(opt.count) + " usable molecules");
    } else {
      render::RandomMolOptions ro;
      ro.min_smiles = opt.min_smiles;
      ro.max_smiles = opt.max_smiles;
      ro.rgroup_prob = opt.rgroup_prob;
      for (int a = 0; a < 64 && !got; ++a) {
        uint64_t ms = derive_seed(opt.seed, "mol", (static_cast<uint64_t>(i) << 8) | a);
        std::optional<Prepared> p =
            prepare(chem::write_canonical(render::random_molecule(ms, ro)), opt.min_smiles,
                    opt.max_smiles);
        if (!p) continue;
        try {
          image = render_sample(p->mol, opt.style, opt.image_side, img_seed);
          got = std::move(p);
        } catch (const Error&) {
        }
      }
      if (!got)
        fail(Err::CorpusExhausted,
             "random source gave no molecule in the length window after 64 tries");
    }

    char name[32];
    std::snprintf(name, sizeof name, "images/mol%05d.pgm", i);
    img::write_pgm((fs::path(out_dir) / name).string(), image);
    records.push_back({name, got->smiles});
  }

  DatasetManifest man = split_records(std::move(records), opt.train_ratio);
  write_manifests(out_dir, man);

  std::ostringstream meta;
  meta << "seed = " << opt.seed << "\n"
       << "count = " << opt.count << "\n"
       << "train_ratio = " << opt.train_ratio << "\n"
       << "train = " << man.train.size() << "\n"
       << "val = " << man.val.size() << "\n"
       << "image_side = " << opt.image_side << "\n"
       << "smiles_min = " << opt.min_smiles << "\n"
       << "smiles_max = " << opt.max_smiles << "\n"
       << "rgroup_prob = " << opt.rgroup_prob << "\n"
       << "bond = " << opt.style.bond_min << ".." << opt.style.bond_max << "\n"
       << "line_width = " << opt.style.width_min << ".." << opt.style.width_max << "\n"
       << "font = " << opt.style.font_min << ".." << opt.style.font_max << "\n"
       << "superatom_prob = " << opt.style.superatom_prob << "\n"
       << "hash_prob = " << opt.style.hash_prob << "\n"
       << "source = " << (corpus ? "corpus:" + opt.corpus_path : std::string("random")) << "\n";
  write_text_file(out_dir + "/dataset.meta", meta.str());
  return man;
}

std::vector<MolSample> load_mol_manifest(const std::string& tsv_path) {
  Tsv t = read_tsv(tsv_path);
  int ip = t.col("image_path");
  int lb = t.col("label");
  fs::path base = fs::path(tsv_path).parent_path();
  std::vector<MolSample> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    fs::path p(row[ip]);
    if (p.is_relative()) p = base / p;
    MolSample s;
    s.image = img::read_pgm(p.string());
    s.smiles = row[lb];
    out.push_back(std::move(s));
  }
  return out;
}

DatasetManifest write_seg_dataset(const SegDatasetOptions& opt, const std::string& out_dir) {
  if (opt.pages < 1 || opt.crops_per_page < 1 || opt.molecules_per_page < 0)
    fail(Err::BadConfig, "bad seg dataset counts");
  if (opt.train_ratio < 0.0 || opt.train_ratio > 1.0)
    fail(Err::BadConfig, "train ratio must lie in [0,1]");

  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "masks");

  std::vector<ManifestRecord> records;
  int idx = 0;
  for (int p = 0; p < opt.pages; ++p) {
    Rng prng(derive_seed(opt.seed, "pagecfg", static_cast<uint64_t>(p)));
    PageStyle st;
    st.density = opt.density;
    st.table = prng.bernoulli(opt.table_prob);
    RasterImage page =
        synth_page(derive_seed(opt.seed, "page", static_cast<uint64_t>(p)), opt.page_width,
                   opt.page_height, st);

    std::vector<chem::MolGraph> mols;
    mols.reserve(static_cast<size_t>(opt.molecules_per_page));
    for (int j = 0; j < opt.molecules_per_page; ++j)
      mols.push_back(render::random_molecule(
          derive_seed(opt.seed, "pagemol", (static_cast<uint64_t>(p) << 10) | j), opt.mol));

    std::vector<SegSample> samples = make_seg_samples(
        page, mols, derive_seed(opt.seed, "samples", static_cast<uint64_t>(p)),
        opt.crops_per_page, opt.compose);
    for (const SegSample& s : samples) {
      char iname[32], mname[32];
      std::snprintf(iname, sizeof iname, "images/crop%05d.pgm", idx);
      std::snprintf(mname, sizeof mname, "masks/crop%05d.pgm", idx);
      img::write_pgm((fs::path(out_dir) / iname).string(), s.crop);
      img::write_pgm((fs::path(out_dir) / mname).string(), s.mask);
      records.push_back({iname, mname});
      ++idx;
    }
  }

  DatasetManifest man = split_records(std::move(records), opt.train_ratio);
  write_manifests(out_dir, man);

  std::ostringstream meta;
  meta << "seed = " << opt.seed << "\n"
       << "pages = " << opt.pages << "\n"
       << "molecules_per_page = " << opt.molecules_per_page << "\n"
       << "crops_per_page = " << opt.crops_per_page << "\n"
       << "train_ratio = " << opt.train_ratio << "\n"
       << "train = " << man.train.size() << "\n"
       << "val = " << man.val.size() << "\n"
       << "page = " << opt.page_width << "x" << opt.page_height << "\n"
       << "table_prob = " << opt.table_prob << "\n"
       << "density = " << opt.density << "\n"
       << "source = synth_pages\n";
  write_text_file(out_dir + "/dataset.meta", meta.str());
  return man;
}

}  // namespace molgrep::data
