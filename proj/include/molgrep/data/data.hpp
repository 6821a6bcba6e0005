//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_DATA_DATA_HPP_
#define MOLGREP_DATA_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "molgrep/chem/mol.hpp"
#include "molgrep/img/raster.hpp"
#include "molgrep/render/render.hpp"

namespace molgrep::data {

using img::RasterImage;

// --- synthetic document pages -----------------------------------------

struct PageStyle {
  double density = 1.0;  // scales text blocks and speck noise; 0 disables all ink
  bool table = false;    // adds ruled grid lines, at least one full page width
};

// Molecule-free page: text-like stroke rows, optional table rules, speck
// noise. Word gaps stay >= 5 px so text survives rule removal. Deterministic
// per (seed, dims, style). Throws Err::BadConfig when a side is below 256.
RasterImage synth_page(uint64_t seed, int width, int height, const PageStyle& style = {});

// --- page composition ---------------------------------------------------

// Inclusive pixel box of one placed structure canvas.
struct Placement {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;
};

struct ComposedPage {
  RasterImage page;
  RasterImage mask;  // 1 where composited structure ink is darker than 0.9
  std::vector<Placement> placements;
  int skipped = 0;  // molecules dropped after placement retries ran out
};

struct ComposeOptions {
  double affine_prob = 0.3;  // warp the structure canvas before placement
  double shade_prob = 0.3;   // gray structure background, kept above 0.92
  double line_prob = 0.2;    // box lines drawn around the structure on the page
  int min_canvas = 96;       // structure canvas side range, clamped to the page
  int max_canvas = 176;
  int max_tries = 60;  // placement rejection attempts per molecule
};

// Renders each molecule on its own canvas, rejection-samples a placement
// whose box (plus a small margin) covers only white page pixels and overlaps
// no earlier box, then composites by min(page, structure). The mask marks
// exactly the structure-canvas pixels darker than 0.9, so page noise and the
// optional surrounding lines never enter it. Molecules that cannot be placed
// are counted in `skipped`; if at least one molecule was requested and none
// could be placed, throws Err::PlacementFailure.
ComposedPage compose_page(const RasterImage& page, const std::vector<chem::MolGraph>& molecules,
                          uint64_t seed, const ComposeOptions& opt = {});

// --- segmentation crops ---------------------------------------------------

struct SegSample {
  RasterImage crop;  // 128 x 128 page pixels
  RasterImage mask;  // 128 x 128, values exactly 0 or 1
};

// Emits `count` 128 x 128 crops of (page, mask). Each draw is structure
// centered with probability 1/2 (a point inside a random placed box, so the
// crop is guaranteed to intersect that structure) and uniform otherwise.
// Throws Err::ShapeMismatch when the page is smaller than 128 on a side.
std::vector<SegSample> crop_page(const ComposedPage& composed, uint64_t seed, int count);

// compose_page + crop_page with sub-seeds derived from `seed`.
std::vector<SegSample> make_seg_samples(const RasterImage& page,
                                        const std::vector<chem::MolGraph>& molecules,
                                        uint64_t seed, int crops_per_page,
                                        const ComposeOptions& opt = {});

// --- dataset manifests ------------------------------------------------

struct ManifestRecord {
  std::string image_path;  // relative to the manifest's directory
  std::string label;       // SMILES for molecule data, mask path for seg data
};

struct DatasetManifest {
  std::vector<ManifestRecord> train;
  std::vector<ManifestRecord> val;
};

// --- molecule image dataset -----------------------------------------------

struct MolStyleRanges {
  double bond_min = 14.0;
  double bond_max = 26.0;
  double width_min = 1.2;
  double width_max = 2.4;
  int font_min = 1;
  int font_max = 2;
  double superatom_prob = 0.25;
  double hash_prob = 0.5;  // share of hashed stereo wedges
};

struct MolDatasetOptions {
  int count = 0;  // required >= 1
  uint64_t seed = 0;
  double train_ratio = 0.9;
  int image_side = 256;
  int min_smiles = 21;
  int max_smiles = 100;
  double rgroup_prob = 0.0;   // attachment placeholders R1..R3 (random source only)
  MolStyleRanges style;
  std::string corpus_path;  // SMILES file, one record per line; empty = random molecules
};

// Writes out_dir/images/mol<i>.pgm, out_dir/train.tsv, out_dir/val.tsv and
// out_dir/dataset.meta. Labels are salt-stripped canonical kekulized SMILES
// with length inside [min_smiles, max_smiles]; the split puts
// floor(count * train_ratio) records in train and the rest in val. Output is
// bit-identical for equal (options, out_dir contentwise). Throws
// Err::CorpusExhausted when the source cannot supply `count` conforming
// molecules and Err::BadConfig for bad counts, ratios, or ranges.
DatasetManifest make_mol_dataset(const MolDatasetOptions& opt, const std::string& out_dir);

struct MolSample {
  RasterImage image;
  std::string smiles;
};

// Reads a train/val manifest and its images; relative image paths resolve
// against the manifest's directory. Throws Err::BadManifest on a malformed
// table and Err::UnreadableImage for missing or broken image files.
std::vector<MolSample> load_mol_manifest(const std::string& tsv_path);

// --- segmentation dataset ----------------------------------------------

struct SegDatasetOptions {
  int pages = 1;
  int molecules_per_page = 4;
  int crops_per_page = 8;
  uint64_t seed = 0;
  double train_ratio = 0.9;
  int page_width = 640;
  int page_height = 640;
  double table_prob = 0.5;
  double density = 1.0;
  render::RandomMolOptions mol;
  ComposeOptions compose;
};

// Writes out_dir/images/crop<i>.pgm, out_dir/masks/crop<i>.pgm, the two
// manifests (label = mask path) and dataset.meta. Split and reproducibility
// rules match make_mol_dataset.
DatasetManifest write_seg_dataset(const SegDatasetOptions& opt, const std::string& out_dir);

}  // namespace molgrep::data

#endif  // MOLGREP_DATA_DATA_HPP_
