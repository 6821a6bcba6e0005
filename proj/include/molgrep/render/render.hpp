//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_RENDER_RENDER_HPP_
#define MOLGREP_RENDER_RENDER_HPP_

#include <array>
#include <string>
#include <vector>

#include "molgrep/chem/mol.hpp"
#include "molgrep/img/raster.hpp"

namespace molgrep::render {

using img::RasterImage;

// Per-atom coordinates in bond-length units, y up.
struct Layout2D {
  std::vector<std::array<double, 2>> pos;
};

enum class WedgeStyle : uint8_t { Triangle, Hash };

struct RenderStyle {
  double bond_length = 20.0;  // pixels per layout unit
  double line_width = 1.6;    // pixels
  int font_scale = 2;
  float background = 1.0f;
  double superatom_prob = 0.0;
  WedgeStyle wedge = WedgeStyle::Triangle;
};

// Places rings on regular polygons and chains on 120-degree walks, then
// relaxes overlaps. Ring systems the templates cannot handle fall back to a
// seeded spring embedding; the call never throws for a valid graph.
Layout2D generate_layout(const chem::MolGraph& mol, uint64_t seed = 0);

// Draws the molecule centered on a width x height canvas. Throws
// Err::CanvasOverflow when the scaled structure cannot keep a 4 px margin;
// callers retry with a smaller bond length. The seed only drives superatom
// contraction choices.
RasterImage rasterize(const chem::MolGraph& mol, const Layout2D& layout, const RenderStyle& style,
                      int width, int height, uint64_t seed = 0);

// rasterize with automatic bond-length back-off until the structure fits.
// Throws Err::CanvasOverflow only when even the minimum length of 3 px fails.
struct FitRender {
  RasterImage image;
  double bond_length = 0.0;
};
FitRender rasterize_fit(const chem::MolGraph& mol, const Layout2D& layout,
                        const RenderStyle& style, int width, int height, uint64_t seed = 0);

// Contractible terminal groups. `fragment` is the group as a standalone
// SMILES written anchor-first; drawing substitutes `label` for the group
// while ground-truth strings keep the expanded form.
struct Superatom {
  std::string label;
  std::string fragment;
};
const std::vector<Superatom>& superatom_table();

struct SuperatomMatch {
  int entry = -1;            // index into superatom_table()
  int anchor = -1;           // group atom bonded to the rest of the molecule
  int attach = -1;           // molecule atom the group hangs from
  std::vector<int> atoms;    // all group atoms, anchor included
};

// Non-overlapping matches, largest groups first; an atom serving as one
// match's attachment point is never swallowed by another match.
std::vector<SuperatomMatch> find_superatoms(const chem::MolGraph& mol);

struct RandomMolOptions {
  int min_heavy = 3;
  int max_heavy = 60;
  // Canonical SMILES length window; 0/0 disables the filter.
  int min_smiles = 0;
  int max_smiles = 0;
  double ring_prob = 0.35;
  double stereo_prob = 0.15;
  double rgroup_prob = 0.0;
};

// Seeded random molecule: element-weighted substituent trees grown on 5/6
// ring templates, valences respected, kekulized output. Resamples internally
// until the constraints hold (bounded retries, then best effort).
chem::MolGraph random_molecule(uint64_t seed, const RandomMolOptions& opt = {});

}  // namespace molgrep::render

#endif  // MOLGREP_RENDER_RENDER_HPP_
