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

#include "molgrep/render/font.hpp"
#include "molgrep/render/render.hpp"

namespace molgrep::render {

namespace {

using chem::Atom;
using chem::Bond;
using chem::MolGraph;
using chem::Parity;

struct Vec {
  double x = 0.0, y = 0.0;
};
Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
double norm(Vec a) { return std::hypot(a.x, a.y); }
Vec unit_or(Vec a, Vec fb) {
  double n = norm(a);
  return n < 1e-9 ? fb : (1.0 / n) * a;
}
Vec perp(Vec a) { return {-a.y, a.x}; }

// --- primitive painters; ink multiplies toward black ---

void stamp(RasterImage& img, int x, int y, double cov, float ink) {
  if (cov <= 0.0 || !img.in_bounds(x, y)) return;
  float& p = img.at(x, y);
  float target = ink + (1.0f - static_cast<float>(cov)) * (p - ink);
  p = std::min(p, std::max(0.0f, target));
}

double point_segment_dist(Vec p, Vec a, Vec b) {
  Vec ab = b - a;
  double len2 = dot(ab, ab);
  double t = len2 < 1e-12 ? 0.0 : std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

void draw_line(RasterImage& img, Vec a, Vec b, double width, float ink) {
  double half = std::max(width, 0.7) * 0.5;
  int x0 = static_cast<int>(std::floor(std::min(a.x, b.x) - half - 1));
  int x1 = static_cast<int>(std::ceil(std::max(a.x, b.x) + half + 1));
  int y0 = static_cast<int>(std::floor(std::min(a.y, b.y) - half - 1));
  int y1 = static_cast<int>(std::ceil(std::max(a.y, b.y) + half + 1));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double d = point_segment_dist({x + 0.5, y + 0.5}, a, b);
      stamp(img, x, y, std::clamp(half + 0.5 - d, 0.0, 1.0), ink);
    }
}

void draw_triangle(RasterImage& img, Vec p0, Vec p1, Vec p2, float ink) {
  auto side = [](Vec p, Vec a, Vec b) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); };
  int x0 = static_cast<int>(std::floor(std::min({p0.x, p1.x, p2.x}) - 1));
  int x1 = static_cast<int>(std::ceil(std::max({p0.x, p1.x, p2.x}) + 1));
  int y0 = static_cast<int>(std::floor(std::min({p0.y, p1.y, p2.y}) - 1));
  int y1 = static_cast<int>(std::ceil(std::max({p0.y, p1.y, p2.y}) + 1));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      int hits = 0;
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
          Vec p{x + 0.25 + 0.5 * sx, y + 0.25 + 0.5 * sy};
          double s0 = side(p, p0, p1), s1 = side(p, p1, p2), s2 = side(p, p2, p0);
          bool neg = s0 < 0 || s1 < 0 || s2 < 0;
          bool pos = s0 > 0 || s1 > 0 || s2 > 0;
          hits += (neg && pos) ? 0 : 1;
        }
      stamp(img, x, y, hits / 4.0, ink);
    }
}

void fill_rect(RasterImage& img, int x0, int y0, int x1, int y1, float value) {
  for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) img.at(x, y) = value;
}

// --- tetrahedral parity from coordinates ---

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 cross3(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot3(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// With q[0] toward the viewer, q[1] -> q[2] -> q[3] read clockwise or
// counterclockwise; the sign of the oriented volume decides which.
Parity parity_from_points(Vec3 c, const std::array<Vec3, 4>& q) {
  Vec3 u = q[0] - c;
  double vol = dot3(u, cross3(q[2] - q[1], q[3] - q[1]));
  if (std::abs(vol) < 1e-12) return Parity::None;
  return vol < 0 ? Parity::Clockwise : Parity::CounterClockwise;
}

// --- superatom matching ---

bool plain(const Atom& a) {
  return a.charge == 0 && a.parity == Parity::None && !a.is_pseudo();
}

bool is_ch3(const MolGraph& mol, int at) {
  const Atom& a = mol.atoms[static_cast<size_t>(at)];
  return a.symbol == "C" && plain(a) && mol.degree(at) == 1 && a.implicit_h == 3;
}

bool single_bond(const MolGraph& mol, int a, int b) {
  int idx = mol.bond_between(a, b);
  return idx != -1 && mol.bonds[static_cast<size_t>(idx)].order == 1;
}

// Matches one table entry anchored at `anchor` hanging from `attach`;
// returns the group atoms or empty.
std::vector<int> match_entry(const MolGraph& mol, const std::string& label, int anchor,
                             int attach) {
  const Atom& an = mol.atoms[static_cast<size_t>(anchor)];
  if (!single_bond(mol, anchor, attach)) return {};
  auto others = [&](int at) {
    std::vector<int> out;
    for (const MolGraph::Nbr& nb : mol.neighbors(at))
      if (nb.atom != attach) out.push_back(nb.atom);
    return out;
  };

  if (label == "Me") {
    if (is_ch3(mol, anchor)) return {anchor};
  } else if (label == "Et") {
    if (an.symbol == "C" && plain(an) && mol.degree(anchor) == 2 && an.implicit_h == 2) {
      std::vector<int> rest = others(anchor);
      if (rest.size() == 1 && is_ch3(mol, rest[0]) && single_bond(mol, anchor, rest[0]))
        return {anchor, rest[0]};
    }
  } else if (label == "OMe" || label == "OEt") {
    if (an.symbol == "O" && plain(an) && mol.degree(anchor) == 2 && an.implicit_h == 0) {
      std::vector<int> rest = others(anchor);
      if (rest.size() != 1 || !single_bond(mol, anchor, rest[0])) return {};
      if (label == "OMe") {
        if (is_ch3(mol, rest[0])) return {anchor, rest[0]};
      } else {
        std::vector<int> tail = match_entry(mol, "Et", rest[0], anchor);
        if (!tail.empty()) {
          tail.insert(tail.begin(), anchor);
          return tail;
        }
      }
    }
  } else if (label == "NEt2") {
    if (an.symbol == "N" && plain(an) && mol.degree(anchor) == 3 && an.implicit_h == 0) {
      std::vector<int> rest = others(anchor);
      if (rest.size() != 2) return {};
      std::vector<int> e0 = match_entry(mol, "Et", rest[0], anchor);
      std::vector<int> e1 = match_entry(mol, "Et", rest[1], anchor);
      if (!e0.empty() && !e1.empty()) {
        std::vector<int> out{anchor};
        out.insert(out.end(), e0.begin(), e0.end());
        out.insert(out.end(), e1.begin(), e1.end());
        return out;
      }
    }
  } else if (label == "CF3") {
    if (an.symbol == "C" && plain(an) && mol.degree(anchor) == 4 && an.implicit_h == 0) {
      std::vector<int> rest = others(anchor);
      if (rest.size() != 3) return {};
      for (int f : rest) {
        const Atom& fa = mol.atoms[static_cast<size_t>(f)];
        if (fa.symbol != "F" || !plain(fa) || mol.degree(f) != 1) return {};
      }
      return {anchor, rest[0], rest[1], rest[2]};
    }
  } else if (label == "tBu") {
    if (an.symbol == "C" && plain(an) && mol.degree(anchor) == 4 && an.implicit_h == 0) {
      std::vector<int> rest = others(anchor);
      if (rest.size() != 3) return {};
      for (int m : rest)
        if (!is_ch3(mol, m) || !single_bond(mol, anchor, m)) return {};
      return {anchor, rest[0], rest[1], rest[2]};
    }
  } else if (label == "Ph") {
    // Benzene ring: six carbons, alternating orders, substituent-free except
    // at the anchor.
    if (an.symbol != "C" || !plain(an) || mol.degree(anchor) != 3) return {};
    std::vector<int> ring{anchor};
    int prev = anchor;
    int cur = -1;
    for (const MolGraph::Nbr& nb : mol.neighbors(anchor))
      if (nb.atom != attach) {
        cur = nb.atom;
        break;
      }
    while (cur != anchor && cur != -1 && ring.size() <= 6) {
      ring.push_back(cur);
      int next = -1;
      for (const MolGraph::Nbr& nb : mol.neighbors(cur))
        if (nb.atom != prev) next = nb.atom;
      const Atom& ca = mol.atoms[static_cast<size_t>(cur)];
      if (ca.symbol != "C" || !plain(ca) || mol.degree(cur) != 2 || ca.implicit_h != 1) return {};
      prev = cur;
      cur = next;
    }
    if (cur != anchor || ring.size() != 6) return {};
    int doubles = 0;
    for (size_t i = 0; i < 6; ++i) {
      int idx = mol.bond_between(ring[i], ring[(i + 1) % 6]);
      if (idx == -1) return {};
      const Bond& bd = mol.bonds[static_cast<size_t>(idx)];
      if (bd.aromatic || bd.order == 2) ++doubles;
      if (bd.order == 3) return {};
    }
    if (doubles < 3) return {};
    return ring;
  } else if (label == "Ac") {
    if (an.symbol == "C" && plain(an) && an.implicit_h == 0) {
      std::vector<int> rest = others(anchor);
      if (rest.size() != 2) return {};
      int oxo = -1, methyl = -1;
      for (int r : rest) {
        const Atom& ra = mol.atoms[static_cast<size_t>(r)];
        int idx = mol.bond_between(anchor, r);
        int order = mol.bonds[static_cast<size_t>(idx)].order;
        if (ra.symbol == "O" && plain(ra) && mol.degree(r) == 1 && order == 2) oxo = r;
        if (is_ch3(mol, r) && order == 1) methyl = r;
      }
      if (oxo != -1 && methyl != -1) return {anchor, oxo, methyl};
    }
  }
  return {};
}

}  // namespace

const std::vector<Superatom>& superatom_table() {
  static const std::vector<Superatom> table = {
      {"Ph", "C1=CC=CC=C1"}, {"NEt2", "N(CC)CC"}, {"tBu", "C(C)(C)C"}, {"CF3", "C(F)(F)F"},
      {"OEt", "OCC"},        {"Ac", "C(C)=O"},    {"OMe", "OC"},       {"Et", "CC"},
      {"Me", "C"},
  };
  return table;
}

std::vector<SuperatomMatch> find_superatoms(const MolGraph& mol) {
  const std::vector<Superatom>& table = superatom_table();
  std::vector<SuperatomMatch> out;
  std::vector<bool> hidden(static_cast<size_t>(mol.atom_count()), false);
  std::vector<bool> protected_(static_cast<size_t>(mol.atom_count()), false);

  // Larger groups first; the table is ordered by size.
  for (size_t entry = 0; entry < table.size(); ++entry) {
    for (int b = 0; b < mol.bond_count(); ++b) {
      const Bond& bond = mol.bonds[static_cast<size_t>(b)];
      for (int flip = 0; flip < 2; ++flip) {
        int anchor = flip ? bond.b : bond.a;
        int attach = flip ? bond.a : bond.b;
        std::vector<int> atoms = match_entry(mol, table[entry].label, anchor, attach);
        if (atoms.empty()) continue;
        bool clear = !hidden[static_cast<size_t>(attach)];
        for (int at : atoms)
          clear = clear && !hidden[static_cast<size_t>(at)] && !protected_[static_cast<size_t>(at)];
        if (!clear) continue;
        for (int at : atoms) hidden[static_cast<size_t>(at)] = true;
        protected_[static_cast<size_t>(attach)] = true;
        SuperatomMatch m;
        m.entry = static_cast<int>(entry);
        m.anchor = anchor;
        m.attach = attach;
        m.atoms = std::move(atoms);
        out.push_back(std::move(m));
        break;
      }
    }
  }
  return out;
}

RasterImage rasterize(const MolGraph& mol, const Layout2D& layout, const RenderStyle& style,
                      int width, int height, uint64_t seed) {
  if (static_cast<int>(layout.pos.size()) != mol.atom_count())
    fail(Err::ShapeMismatch, "layout does not cover the molecule");
  if (style.bond_length < 3.0) fail(Err::CanvasOverflow, "bond length below 3 px");
  if (width < 16 || height < 16) fail(Err::CanvasOverflow, "canvas too small");

  const int n = mol.atom_count();
  const double s = style.bond_length;
  const float ink = 0.0f;

  // Superatom contraction choices.
  Rng rng(derive_seed(seed, "superatoms"));
  std::vector<bool> hidden(static_cast<size_t>(n), false);
  std::vector<std::pair<int, std::string>> overrides;  // anchor -> label text
  if (style.superatom_prob > 0.0) {
    for (const SuperatomMatch& m : find_superatoms(mol)) {
      if (!rng.bernoulli(style.superatom_prob)) continue;
      for (int at : m.atoms)
        if (at != m.anchor) hidden[static_cast<size_t>(at)] = true;
      overrides.emplace_back(m.anchor, superatom_table()[static_cast<size_t>(m.entry)].label);
    }
  }

  auto label_override = [&](int at) -> const std::string* {
    for (const auto& [anchor, text] : overrides)
      if (anchor == at) return &text;
    return nullptr;
  };

  // Label text per atom; empty string means a bare vertex.
  auto label_text = [&](int at) -> std::string {
    if (const std::string* text = label_override(at)) return *text;
    const Atom& a = mol.atoms[static_cast<size_t>(at)];
    bool want = a.is_pseudo() || a.symbol != "C" || a.charge != 0 || mol.degree(at) == 0;
    if (!want) return "";
    std::string text = a.symbol;
    if (!a.is_pseudo() && a.implicit_h > 0) {
      text += "H";
      if (a.implicit_h > 1) text += static_cast<char>('0' + a.implicit_h);
    }
    if (a.charge != 0) {
      int mag = std::abs(a.charge);
      if (mag > 1) text += static_cast<char>('0' + mag);
      text += a.charge > 0 ? '+' : '-';
    }
    return text;
  };

  // Pixel transform (layout y up, pixels y down) and overflow check.
  double min_x = 1e30, max_x = -1e30, min_y = 1e30, max_y = -1e30;
  for (int at = 0; at < n; ++at) {
    if (hidden[static_cast<size_t>(at)]) continue;
    double px = layout.pos[static_cast<size_t>(at)][0] * s;
    double py = -layout.pos[static_cast<size_t>(at)][1] * s;
    std::string text = label_text(at);
    double ex = style.line_width;
    double ey = style.line_width;
    if (!text.empty()) {
      ex = std::max(ex, text_width(text, style.font_scale) * 0.5 + 2.0);
      ey = std::max(ey, kGlyphHeight * style.font_scale * 0.5 + 2.0);
    }
    min_x = std::min(min_x, px - ex);
    max_x = std::max(max_x, px + ex);
    min_y = std::min(min_y, py - ey);
    max_y = std::max(max_y, py + ey);
  }
  const double margin = 4.0;
  if (max_x - min_x > width - 2 * margin || max_y - min_y > height - 2 * margin)
    fail(Err::CanvasOverflow, "structure exceeds canvas with 4 px margin");
  double off_x = (width - (max_x - min_x)) / 2.0 - min_x;
  double off_y = (height - (max_y - min_y)) / 2.0 - min_y;

  auto pix = [&](int at) -> Vec {
    return {layout.pos[static_cast<size_t>(at)][0] * s + off_x,
            -layout.pos[static_cast<size_t>(at)][1] * s + off_y};
  };

  RasterImage img(width, height, style.background);
  std::vector<bool> ring_bond = chem::ring_bond_flags(mol);

  // Wedge bonds chosen per stereocenter: bond index -> +1 triangle, -1 hash,
  // keyed on the narrow-end atom.
  struct Wedge {
    int bond;
    int center;
    int zsign;
  };
  std::vector<Wedge> wedges;
  for (int at = 0; at < n; ++at) {
    const Atom& a = mol.atoms[static_cast<size_t>(at)];
    if (a.parity == Parity::None || hidden[static_cast<size_t>(at)]) continue;
    // Candidate neighbors for the stereo bond, deterministic preference:
    // terminal first, then acyclic, then lowest index.
    std::vector<int> cands;
    for (const MolGraph::Nbr& nb : mol.neighbors(at)) {
      if (hidden[static_cast<size_t>(nb.atom)]) continue;
      if (mol.bonds[static_cast<size_t>(nb.bond)].order != 1) continue;
      cands.push_back(nb.atom);
    }
    if (cands.empty()) continue;
    std::sort(cands.begin(), cands.end(), [&](int u, int v) {
      auto rank = [&](int w) {
        int br = mol.bond_between(at, w);
        return std::make_tuple(mol.degree(w) != 1, static_cast<bool>(ring_bond[br]), w);
      };
      return rank(u) < rank(v);
    });

    Vec c2 = pix(at);
    auto solve = [&](int wedge_to, int zsign) {
      std::array<Vec3, 4> q;
      Vec3 c3{c2.x, -c2.y, 0.0};  // restore y-up handedness for the parity math
      Vec3 acc{0.0, 0.0, 0.0};
      int phantom_slot = -1;
      for (int k = 0; k < 4; ++k) {
        int nb = a.stereo_nbrs[static_cast<size_t>(k)];
        if (nb < 0) {
          phantom_slot = k;
          continue;
        }
        Vec p = pix(nb);
        q[static_cast<size_t>(k)] = {p.x, -p.y, nb == wedge_to ? static_cast<double>(zsign) : 0.0};
        acc.x += q[static_cast<size_t>(k)].x - c3.x;
        acc.y += q[static_cast<size_t>(k)].y - c3.y;
        acc.z += q[static_cast<size_t>(k)].z - c3.z;
      }
      if (phantom_slot >= 0)
        q[static_cast<size_t>(phantom_slot)] = {c3.x - acc.x, c3.y - acc.y, c3.z - acc.z};
      return parity_from_points(c3, q);
    };

    bool done = false;
    int preferred = style.wedge == WedgeStyle::Triangle ? 1 : -1;
    for (int zsign : {preferred, -preferred}) {
      for (int cand : cands) {
        if (solve(cand, zsign) == a.parity) {
          wedges.push_back({mol.bond_between(at, cand), at, zsign});
          done = true;
          break;
        }
      }
      if (done) break;
    }
  }
  auto wedge_of = [&](int bond) -> const Wedge* {
    for (const Wedge& w : wedges)
      if (w.bond == bond) return &w;
    return nullptr;
  };

  // Ring interior side for offset double-bond lines.
  auto ring_inner_dir = [&](const Bond& bond) -> Vec {
    Vec A = pix(bond.a), B = pix(bond.b);
    Vec axis = unit_or(B - A, {1.0, 0.0});
    Vec acc{0.0, 0.0};
    int cnt = 0;
    for (const MolGraph::Nbr& nb : mol.neighbors(bond.a))
      if (nb.atom != bond.b && ring_bond[nb.bond]) {
        acc = acc + (pix(nb.atom) - A);
        ++cnt;
      }
    for (const MolGraph::Nbr& nb : mol.neighbors(bond.b))
      if (nb.atom != bond.a && ring_bond[nb.bond]) {
        acc = acc + (pix(nb.atom) - B);
        ++cnt;
      }
    if (cnt == 0) return perp(axis);
    Vec side = acc - dot(acc, axis) * axis;
    return unit_or(side, perp(axis));
  };

  for (int b = 0; b < mol.bond_count(); ++b) {
    const Bond& bond = mol.bonds[static_cast<size_t>(b)];
    if (hidden[static_cast<size_t>(bond.a)] || hidden[static_cast<size_t>(bond.b)]) continue;
    Vec A = pix(bond.a), B = pix(bond.b);
    if (const Wedge* w = wedge_of(b)) {
      Vec from = w->center == bond.a ? A : B;
      Vec to = w->center == bond.a ? B : A;
      Vec axis = unit_or(to - from, {1.0, 0.0});
      Vec side = perp(axis);
      double base = std::max(0.16 * s, 2.5);
      if (w->zsign > 0) {
        draw_triangle(img, from, to + (0.5 * base) * side, to - (0.5 * base) * side, ink);
      } else {
        int strokes = 4;
        for (int k = 0; k < strokes; ++k) {
          double t = (k + 1.0) / (strokes + 1.0);
          double half = 0.5 * (0.3 + 0.7 * t) * base;
          Vec m = from + t * (to - from);
          draw_line(img, m + half * side, m - half * side, style.line_width * 0.8, ink);
        }
      }
      continue;
    }
    if (bond.order == 1 || bond.aromatic) {
      draw_line(img, A, B, style.line_width, ink);
    } else if (bond.order == 2) {
      if (ring_bond[b]) {
        draw_line(img, A, B, style.line_width, ink);
        Vec inner = ring_inner_dir(bond);
        double o = std::max(0.16 * s, 2.2);
        Vec A2 = A + o * inner + 0.18 * (B - A);
        Vec B2 = B + o * inner - 0.18 * (B - A);
        draw_line(img, A2, B2, style.line_width, ink);
      } else {
        Vec side = perp(unit_or(B - A, {1.0, 0.0}));
        double o = std::max(0.08 * s, 1.1);
        draw_line(img, A + o * side, B + o * side, style.line_width, ink);
        draw_line(img, A - o * side, B - o * side, style.line_width, ink);
      }
    } else {
      Vec side = perp(unit_or(B - A, {1.0, 0.0}));
      double o = std::max(0.14 * s, 2.0);
      draw_line(img, A, B, style.line_width, ink);
      draw_line(img, A + o * side, B + o * side, style.line_width, ink);
      draw_line(img, A - o * side, B - o * side, style.line_width, ink);
    }
  }

  // Labels, boxed in background so crossing bonds do not strike through.
  for (int at = 0; at < n; ++at) {
    if (hidden[static_cast<size_t>(at)]) continue;
    std::string text = label_text(at);
    if (text.empty()) continue;
    Vec p = pix(at);
    int tw = text_width(text, style.font_scale);
    int th = kGlyphHeight * style.font_scale;
    int left = static_cast<int>(std::lround(p.x - tw / 2.0));
    int top = static_cast<int>(std::lround(p.y - th / 2.0));
    int pad = std::max(1, style.font_scale - 1);
    fill_rect(img, left - pad, top - pad, left + tw + pad - 1, top + th + pad - 1,
              style.background);
    draw_text(img, text, left, top, style.font_scale, ink);
  }

  return img;
}

FitRender rasterize_fit(const MolGraph& mol, const Layout2D& layout, const RenderStyle& style,
                        int width, int height, uint64_t seed) {
  RenderStyle trial = style;
  while (true) {
    try {
      FitRender out{rasterize(mol, layout, trial, width, height, seed), trial.bond_length};
      return out;
    } catch (const Error& e) {
      if (e.code() != Err::CanvasOverflow) throw;
      double next = trial.bond_length * 0.85;
      if (trial.bond_length <= 3.0) throw;
      trial.bond_length = std::max(3.0, next);
    }
  }
}

}  // namespace molgrep::render
