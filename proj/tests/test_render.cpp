//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "molgrep/chem/smiles.hpp"
#include "molgrep/render/render.hpp"

using namespace molgrep;
using namespace molgrep::render;
using chem::MolGraph;
using chem::Parity;

namespace {

double dist(const Layout2D& lay, int a, int b) {
  double dx = lay.pos[static_cast<size_t>(a)][0] - lay.pos[static_cast<size_t>(b)][0];
  double dy = lay.pos[static_cast<size_t>(a)][1] - lay.pos[static_cast<size_t>(b)][1];
  return std::hypot(dx, dy);
}

double min_pair_dist(const Layout2D& lay) {
  double best = 1e30;
  for (size_t i = 0; i < lay.pos.size(); ++i)
    for (size_t j = i + 1; j < lay.pos.size(); ++j) {
      double dx = lay.pos[i][0] - lay.pos[j][0];
      double dy = lay.pos[i][1] - lay.pos[j][1];
      best = std::min(best, std::hypot(dx, dy));
    }
  return best;
}

void check_layout_invariants(const MolGraph& mol, const Layout2D& lay) {
  REQUIRE(lay.pos.size() == static_cast<size_t>(mol.atom_count()));
  if (mol.atom_count() > 1) CHECK(min_pair_dist(lay) > 1e-7);
  for (const chem::Bond& b : mol.bonds) {
    double d = dist(lay, b.a, b.b);
    CHECK(d > 0.8);
    CHECK(d < 1.2);
  }
}

// Interior angle at `mid` between its bonds to `a` and `b`, degrees.
double angle_deg(const Layout2D& lay, int a, int mid, int b) {
  double ux = lay.pos[static_cast<size_t>(a)][0] - lay.pos[static_cast<size_t>(mid)][0];
  double uy = lay.pos[static_cast<size_t>(a)][1] - lay.pos[static_cast<size_t>(mid)][1];
  double vx = lay.pos[static_cast<size_t>(b)][0] - lay.pos[static_cast<size_t>(mid)][0];
  double vy = lay.pos[static_cast<size_t>(b)][1] - lay.pos[static_cast<size_t>(mid)][1];
  double c = (ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy));
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / 3.14159265358979323846;
}

int dark_pixels(const RasterImage& img) {
  int n = 0;
  for (float p : img.pixels) n += p < 0.5f ? 1 : 0;
  return n;
}

// Signed side of point p relative to the a->b axis.
double side_of(const Layout2D& lay, int a, int b, int p) {
  double ax = lay.pos[static_cast<size_t>(a)][0], ay = lay.pos[static_cast<size_t>(a)][1];
  double bx = lay.pos[static_cast<size_t>(b)][0], by = lay.pos[static_cast<size_t>(b)][1];
  double px = lay.pos[static_cast<size_t>(p)][0], py = lay.pos[static_cast<size_t>(p)][1];
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Induced subgraph with hydrogen counts recomputed from the remaining bonds,
// the way a fragment drawn on its own would carry them.
MolGraph subgraph_refilled(const MolGraph& mol, const std::vector<int>& atoms) {
  MolGraph sub = chem::subgraph(mol, atoms);
  for (int at = 0; at < sub.atom_count(); ++at) {
    chem::Atom& a = sub.atoms[static_cast<size_t>(at)];
    if (a.is_pseudo()) continue;
    int v = chem::default_valence(a.symbol, a.charge, sub.explicit_valence(at));
    a.implicit_h = v < 0 ? 0 : v - sub.explicit_valence(at);
    a.parity = Parity::None;
    a.stereo_nbrs = {chem::kStereoUnused, chem::kStereoUnused, chem::kStereoUnused,
                     chem::kStereoUnused};
  }
  return sub;
}

}  // namespace

TEST_CASE("butane lays out as a unit zig-zag") {
  MolGraph mol = chem::parse_smiles("CCCC");
  Layout2D lay = generate_layout(mol, 1);
  check_layout_invariants(mol, lay);
  for (const chem::Bond& b : mol.bonds) CHECK(dist(lay, b.a, b.b) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(angle_deg(lay, 0, 1, 2) == doctest::Approx(120.0).epsilon(0.001));
  CHECK(angle_deg(lay, 1, 2, 3) == doctest::Approx(120.0).epsilon(0.001));
}

TEST_CASE("cyclohexane lays out as a regular hexagon") {
  MolGraph mol = chem::parse_smiles("C1CCCCC1");
  Layout2D lay = generate_layout(mol, 3);
  check_layout_invariants(mol, lay);
  std::vector<double> lens;
  for (const chem::Bond& b : mol.bonds) lens.push_back(dist(lay, b.a, b.b));
  double lo = *std::min_element(lens.begin(), lens.end());
  double hi = *std::max_element(lens.begin(), lens.end());
  CHECK(hi / lo < 1.01);
  // Regular hexagon: circumradius equals the side everywhere.
  double cx = 0.0, cy = 0.0;
  for (auto& p : lay.pos) {
    cx += p[0] / 6.0;
    cy += p[1] / 6.0;
  }
  for (auto& p : lay.pos)
    CHECK(std::hypot(p[0] - cx, p[1] - cy) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("naphthalene keeps fused-ring atoms apart") {
  MolGraph mol = chem::parse_smiles("C1=CC=C2C=CC=CC2=C1");
  Layout2D lay = generate_layout(mol, 5);
  check_layout_invariants(mol, lay);
  CHECK(min_pair_dist(lay) > 0.5);
}

TEST_CASE("bridged bicyclics fall back without violating layout bounds") {
  MolGraph mol = chem::parse_smiles("C1CC2CCC1C2");
  Layout2D lay = generate_layout(mol, 9);
  check_layout_invariants(mol, lay);
}

TEST_CASE("biphenyl keeps both rings regular") {
  MolGraph mol = chem::parse_smiles("C1=CC=CC=C1C1=CC=CC=C1");
  Layout2D lay = generate_layout(mol, 2);
  check_layout_invariants(mol, lay);
  std::vector<bool> ring = chem::ring_bond_flags(mol);
  for (int b = 0; b < mol.bond_count(); ++b)
    if (ring[static_cast<size_t>(b)])
      CHECK(dist(lay, mol.bonds[static_cast<size_t>(b)].a, mol.bonds[static_cast<size_t>(b)].b) ==
            doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("layout is deterministic in the seed") {
  MolGraph mol = chem::parse_smiles("CC(C)C1=CC=C(C=C1)C(C)C(=O)O");
  Layout2D a = generate_layout(mol, 42);
  Layout2D b = generate_layout(mol, 42);
  REQUIRE(a.pos.size() == b.pos.size());
  for (size_t i = 0; i < a.pos.size(); ++i) {
    CHECK(a.pos[i][0] == b.pos[i][0]);
    CHECK(a.pos[i][1] == b.pos[i][1]);
  }
}

TEST_CASE("disconnected components are shelved apart") {
  MolGraph mol = chem::parse_smiles("CCO.CCN");
  Layout2D lay = generate_layout(mol, 7);
  check_layout_invariants(mol, lay);
  double gap = 1e30;
  for (int i = 0; i < 3; ++i)
    for (int j = 3; j < 6; ++j) gap = std::min(gap, dist(lay, i, j));
  CHECK(gap > 1.0);
}

TEST_CASE("double-bond geometry follows the parsed configuration") {
  auto drawn_sides = [](const char* smiles) {
    MolGraph mol = chem::parse_smiles(smiles);
    Layout2D lay = generate_layout(mol, 11);
    check_layout_invariants(mol, lay);
    std::vector<double> prods;
    for (const chem::Bond& b : mol.bonds) {
      if (!b.has_cistrans) continue;
      double sa = side_of(lay, b.a, b.b, b.ref_a);
      double sb = side_of(lay, b.a, b.b, b.ref_b);
      prods.push_back(sa * sb * (b.cis ? 1.0 : -1.0));
    }
    return prods;
  };
  std::vector<double> trans = drawn_sides("F/C=C/F");
  REQUIRE(trans.size() == 1);
  CHECK(trans[0] > 1e-6);
  std::vector<double> cis = drawn_sides("F/C=C\\F");
  REQUIRE(cis.size() == 1);
  CHECK(cis[0] > 1e-6);
  std::vector<double> diene = drawn_sides("C/C=C/C=C/C");
  REQUIRE(diene.size() == 2);
  for (double p : diene) CHECK(p > 1e-6);
}

TEST_CASE("layout invariants hold across a random batch") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RandomMolOptions opt;
    opt.stereo_prob = 0.3;
    MolGraph mol = random_molecule(seed, opt);
    Layout2D lay = generate_layout(mol, seed);
    check_layout_invariants(mol, lay);
  }
}

TEST_CASE("methane renders as a labeled vertex") {
  MolGraph mol = chem::parse_smiles("C");
  Layout2D lay = generate_layout(mol, 0);
  RasterImage img = rasterize(mol, lay, RenderStyle{}, 64, 64);
  CHECK(img.width == 64);
  CHECK(img.height == 64);
  // "CH4" at font scale 2: well over twenty glyph pixels.
  CHECK(dark_pixels(img) > 20);
}

TEST_CASE("rendered structures carry enough ink") {
  RenderStyle style;
  for (const char* smiles : {"CC", "CCO", "C1=CC=CC=C1", "CC(=O)OC1=CC=CC=C1C(=O)O"}) {
    MolGraph mol = chem::parse_smiles(smiles);
    Layout2D lay = generate_layout(mol, 13);
    RasterImage img = rasterize(mol, lay, style, 300, 300);
    CHECK(dark_pixels(img) >= static_cast<int>(style.bond_length * style.line_width / 2.0));
  }
}

TEST_CASE("rasterization is bit-identical for equal inputs") {
  MolGraph mol = chem::parse_smiles("CC(=O)NC1=CC=C(O)C=C1");
  Layout2D lay = generate_layout(mol, 21);
  RenderStyle style;
  style.superatom_prob = 0.5;
  RasterImage a = rasterize(mol, lay, style, 256, 256, 77);
  RasterImage b = rasterize(mol, lay, style, 256, 256, 77);
  REQUIRE(a.pixels.size() == b.pixels.size());
  CHECK(std::equal(a.pixels.begin(), a.pixels.end(), b.pixels.begin()));
}

TEST_CASE("higher bond orders add parallel lines") {
  RenderStyle style;
  auto ink = [&](const char* smiles) {
    MolGraph mol = chem::parse_smiles(smiles);
    Layout2D lay = generate_layout(mol, 1);
    return dark_pixels(rasterize(mol, lay, style, 128, 128));
  };
  int single = ink("CC");
  int dbl = ink("C=C");
  int triple = ink("C#C");
  CHECK(dbl > single + 10);
  CHECK(triple > dbl + 5);
}

TEST_CASE("oversized structures overflow and the fit wrapper recovers") {
  std::string chain(30, 'C');
  MolGraph mol = chem::parse_smiles(chain);
  Layout2D lay = generate_layout(mol, 4);
  CHECK_THROWS_WITH_AS(static_cast<void>(rasterize(mol, lay, RenderStyle{}, 64, 64)),
                       doctest::Contains("CanvasOverflow"), Error);

  FitRender fit = rasterize_fit(mol, lay, RenderStyle{}, 300, 300);
  CHECK(fit.bond_length < 20.0);
  CHECK(fit.bond_length >= 3.0);
  CHECK(dark_pixels(fit.image) > 50);

  // Even the minimum bond length cannot squeeze 30 atoms into 16 px.
  CHECK_THROWS_WITH_AS(static_cast<void>(rasterize_fit(mol, lay, RenderStyle{}, 16, 16)),
                       doctest::Contains("CanvasOverflow"), Error);
}

TEST_CASE("enantiomers render differently on a shared layout") {
  MolGraph l = chem::parse_smiles("N[C@@H](C)C(=O)O");
  MolGraph d = chem::parse_smiles("N[C@H](C)C(=O)O");
  REQUIRE(l.atoms[1].parity != d.atoms[1].parity);
  Layout2D lay = generate_layout(l, 6);
  RenderStyle style;
  RasterImage li = rasterize(l, lay, style, 200, 200);
  RasterImage di = rasterize(d, lay, style, 200, 200);
  CHECK(dark_pixels(li) > 30);
  CHECK(dark_pixels(di) > 30);
  CHECK(!std::equal(li.pixels.begin(), li.pixels.end(), di.pixels.begin()));
}

TEST_CASE("hash wedges differ from triangle wedges") {
  // A center with four drawn neighbors leaves the wedge style a free choice;
  // with three, the implicit hydrogen pins it.
  MolGraph mol = chem::parse_smiles("C[C@](N)(O)CC");
  Layout2D lay = generate_layout(mol, 6);
  RenderStyle tri;
  RenderStyle hash;
  hash.wedge = WedgeStyle::Hash;
  RasterImage a = rasterize(mol, lay, tri, 200, 200);
  RasterImage b = rasterize(mol, lay, hash, 200, 200);
  CHECK(!std::equal(a.pixels.begin(), a.pixels.end(), b.pixels.begin()));
}

TEST_CASE("superatom table entries parse to their own labels' structures") {
  for (const Superatom& s : superatom_table()) {
    MolGraph frag = chem::parse_smiles(s.fragment);
    CHECK(frag.atom_count() >= 1);
  }
  // Ordered largest group first so greedy matching prefers big contractions.
  const std::vector<Superatom>& table = superatom_table();
  for (size_t i = 1; i < table.size(); ++i)
    CHECK(chem::parse_smiles(table[i - 1].fragment).atom_count() >=
          chem::parse_smiles(table[i].fragment).atom_count());
}

TEST_CASE("superatom matching finds each group and mirrors its fragment") {
  struct Fixture {
    const char* smiles;
    const char* label;
    int group_size;
  };
  const Fixture fixtures[] = {
      {"CC1CCCC1", "Me", 1},           {"CCC1CCCC1", "Et", 2},
      {"COC1CCCC1", "OMe", 2},         {"CCOC1CCCC1", "OEt", 3},
      {"CCN(CC)C1CCCC1", "NEt2", 5},   {"FC(F)(F)C1CCCC1", "CF3", 4},
      {"CC(C)(C)C1CCCC1", "tBu", 4},   {"CC(=O)C1CCCC1", "Ac", 3},
      {"CC1=CC=CC=C1", "Ph", 6},
  };
  for (const Fixture& fx : fixtures) {
    CAPTURE(fx.smiles);
    MolGraph mol = chem::parse_smiles(fx.smiles);
    std::vector<SuperatomMatch> matches = find_superatoms(mol);
    REQUIRE(matches.size() == 1);
    const SuperatomMatch& m = matches[0];
    const Superatom& entry = superatom_table()[static_cast<size_t>(m.entry)];
    CHECK(entry.label == fx.label);
    CHECK(static_cast<int>(m.atoms.size()) == fx.group_size);
    CHECK(std::count(m.atoms.begin(), m.atoms.end(), m.anchor) == 1);
    CHECK(std::count(m.atoms.begin(), m.atoms.end(), m.attach) == 0);
    CHECK(mol.bond_between(m.anchor, m.attach) != -1);
    // The matched atoms, detached from the molecule, are exactly the
    // fragment the label stands for.
    MolGraph group = subgraph_refilled(mol, m.atoms);
    CHECK(chem::mol_equal(group, chem::parse_smiles(entry.fragment)));
  }
}

TEST_CASE("greedy matching never overlaps and protects attachment atoms") {
  // Anisole: the ring is taken as Ph first, the ether oxygen is its
  // attachment and must stay visible; the methyl still contracts.
  MolGraph mol = chem::parse_smiles("COC1=CC=CC=C1");
  std::vector<SuperatomMatch> matches = find_superatoms(mol);
  REQUIRE(matches.size() == 2);
  std::set<std::string> labels;
  std::set<int> used;
  for (const SuperatomMatch& m : matches) {
    labels.insert(superatom_table()[static_cast<size_t>(m.entry)].label);
    for (int at : m.atoms) {
      CHECK(used.count(at) == 0);
      used.insert(at);
    }
  }
  CHECK(labels == std::set<std::string>{"Ph", "Me"});
  CHECK(used.count(1) == 0);  // the ether oxygen stays

  // Bare benzene offers no attachment bond, so nothing contracts.
  CHECK(find_superatoms(chem::parse_smiles("C1=CC=CC=C1")).empty());
}

TEST_CASE("contraction shrinks drawn ink but keeps the vertex labeled") {
  MolGraph mol = chem::parse_smiles("CC1=CC=CC=C1");
  Layout2D lay = generate_layout(mol, 15);
  RenderStyle plain;
  RenderStyle contracted;
  contracted.superatom_prob = 1.0;
  RasterImage full = rasterize(mol, lay, plain, 220, 220, 3);
  RasterImage collapsed = rasterize(mol, lay, contracted, 220, 220, 3);
  CHECK(dark_pixels(collapsed) > 10);
  CHECK(dark_pixels(collapsed) < dark_pixels(full));

  // Probability zero never contracts regardless of seed.
  RenderStyle off;
  off.superatom_prob = 0.0;
  RasterImage a = rasterize(mol, lay, off, 220, 220, 1);
  RasterImage b = rasterize(mol, lay, off, 220, 220, 2);
  CHECK(std::equal(a.pixels.begin(), a.pixels.end(), b.pixels.begin()));
}

TEST_CASE("random molecules respect the heavy-atom bounds") {
  RandomMolOptions tight;
  tight.min_heavy = 3;
  tight.max_heavy = 3;
  for (uint64_t seed = 0; seed < 10; ++seed)
    CHECK(random_molecule(seed, tight).heavy_atom_count() == 3);

  RandomMolOptions wide;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    MolGraph mol = random_molecule(seed, wide);
    int heavy = mol.heavy_atom_count();
    CHECK(heavy >= 3);
    CHECK(heavy <= 60);
  }
}

TEST_CASE("random molecules are valid, canonical-stable, and seeded") {
  RandomMolOptions opt;
  opt.stereo_prob = 0.3;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    MolGraph mol = random_molecule(seed, opt);
    for (int at = 0; at < mol.atom_count(); ++at) {
      const chem::Atom& a = mol.atoms[static_cast<size_t>(at)];
      CHECK(a.implicit_h >= 0);
      if (!a.is_pseudo())
        CHECK(chem::default_valence(a.symbol, a.charge, mol.explicit_valence(at)) >= 0);
    }
    std::string canon = chem::write_canonical(mol);
    CHECK(chem::valid_smiles(canon));
    CHECK(chem::write_canonical(chem::parse_smiles(canon)) == canon);
  }
  CHECK(chem::write_canonical(random_molecule(123, opt)) ==
        chem::write_canonical(random_molecule(123, opt)));
}

TEST_CASE("random molecules honor the canonical length window") {
  RandomMolOptions opt;
  opt.min_smiles = 21;
  opt.max_smiles = 100;
  int stereo_seen = 0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    MolGraph mol = random_molecule(seed, opt);
    std::string canon = chem::write_canonical(mol);
    CHECK(canon.size() >= 21);
    CHECK(canon.size() <= 100);
    for (const chem::Atom& a : mol.atoms) stereo_seen += a.parity != Parity::None ? 1 : 0;
  }
  CHECK(stereo_seen > 0);
}

TEST_CASE("random molecules can carry attachment-point labels") {
  RandomMolOptions opt;
  opt.rgroup_prob = 1.0;
  opt.min_heavy = 10;
  int pseudo = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    MolGraph mol = random_molecule(seed, opt);
    for (const chem::Atom& a : mol.atoms)
      if (a.is_pseudo()) {
        ++pseudo;
        break;
      }
  }
  CHECK(pseudo > 10);
}

TEST_CASE("random molecules render end to end") {
  RandomMolOptions opt;
  opt.stereo_prob = 0.2;
  opt.rgroup_prob = 0.1;
  for (uint64_t seed = 100; seed < 115; ++seed) {
    MolGraph mol = random_molecule(seed, opt);
    Layout2D lay = generate_layout(mol, seed);
    RenderStyle style;
    style.superatom_prob = 0.3;
    FitRender fit = rasterize_fit(mol, lay, style, 256, 256, seed);
    CHECK(dark_pixels(fit.image) >= static_cast<int>(fit.bond_length * style.line_width / 2.0));
  }
}
