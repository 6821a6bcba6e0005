//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <string>
#include <vector>

#include "molgrep/chem/smiles.hpp"
#include "molgrep/render/render.hpp"

namespace molgrep::render {

namespace {

using chem::Atom;
using chem::MolGraph;
using chem::Parity;

// Kekulized ring templates grafted during growth.
const char* kRingTemplates[] = {
    "C1=CC=CC=C1", "C1CCCCC1", "C1CCCC1", "C1=CC=CN1", "C1CCOC1", "C1CCNCC1", "C1CCOCC1",
};

int capacity(const MolGraph& mol, int at) {
  const Atom& a = mol.atoms[static_cast<size_t>(at)];
  if (a.is_pseudo()) return 1 - mol.explicit_valence(at);
  int cap = 4;
  if (a.symbol == "N" || a.symbol == "P") cap = 3;
  if (a.symbol == "O" || a.symbol == "S") cap = 2;
  if (a.symbol == "F" || a.symbol == "Cl" || a.symbol == "Br" || a.symbol == "I") cap = 1;
  return cap - mol.explicit_valence(at);
}

bool has_double_bond(const MolGraph& mol, int at) {
  for (const MolGraph::Nbr& nb : mol.neighbors(at))
    if (mol.bonds[static_cast<size_t>(nb.bond)].order >= 2) return true;
  return false;
}

std::string pick_element(Rng& rng) {
  double roll = rng.uniform();
  if (roll < 0.60) return "C";
  if (roll < 0.72) return "N";
  if (roll < 0.84) return "O";
  if (roll < 0.88) return "S";
  if (roll < 0.93) return "F";
  if (roll < 0.97) return "Cl";
  if (roll < 0.99) return "Br";
  return "I";
}

// Appends a parsed ring template, bonding its first atom to `at`.
void graft_ring(MolGraph& mol, int at, const char* smiles) {
  MolGraph ring = chem::parse_smiles(smiles);
  int base = mol.atom_count();
  for (const Atom& a : ring.atoms) {
    Atom copy = a;
    copy.implicit_h = 0;  // recomputed at finalize
    mol.add_atom(copy);
  }
  for (const chem::Bond& b : ring.bonds) mol.add_bond(base + b.a, base + b.b, b.order);
  mol.add_bond(at, base, 1);
}

void finalize_hydrogens(MolGraph& mol) {
  for (int at = 0; at < mol.atom_count(); ++at) {
    Atom& a = mol.atoms[static_cast<size_t>(at)];
    if (a.is_pseudo()) {
      a.implicit_h = 0;
      continue;
    }
    int v = chem::default_valence(a.symbol, a.charge, mol.explicit_valence(at));
    a.implicit_h = v < 0 ? 0 : v - mol.explicit_valence(at);
  }
}

void sprinkle_stereo(MolGraph& mol, Rng& rng, double prob) {
  for (int at = 0; at < mol.atom_count(); ++at) {
    Atom& a = mol.atoms[static_cast<size_t>(at)];
    if (a.symbol != "C" || a.charge != 0 || has_double_bond(mol, at)) continue;
    int deg = mol.degree(at);
    bool four = deg == 4 && a.implicit_h == 0;
    bool three = deg == 3 && a.implicit_h == 1;
    if (!four && !three) continue;
    if (!rng.bernoulli(prob)) continue;
    const auto& nbrs = mol.neighbors(at);
    for (size_t k = 0; k < 4; ++k)
      a.stereo_nbrs[k] = k < nbrs.size() ? nbrs[k].atom : chem::kStereoImplicitH;
    a.parity = rng.bernoulli(0.5) ? Parity::Clockwise : Parity::CounterClockwise;
  }
}

MolGraph build_attempt(Rng& rng, const RandomMolOptions& opt, int target_heavy) {
  MolGraph mol;
  int rgroups_used = 0;
  if (rng.bernoulli(opt.ring_prob) && target_heavy >= 8) {
    MolGraph ring = chem::parse_smiles(
        kRingTemplates[rng.uniform_int(static_cast<int>(std::size(kRingTemplates)))]);
    for (const Atom& a : ring.atoms) {
      Atom copy = a;
      copy.implicit_h = 0;
      mol.add_atom(copy);
    }
    for (const chem::Bond& b : ring.bonds) mol.add_bond(b.a, b.b, b.order);
  } else {
    Atom seed_atom;
    seed_atom.symbol = "C";
    mol.add_atom(seed_atom);
  }

  int guard = 0;
  while (mol.heavy_atom_count() < target_heavy && ++guard < 4 * opt.max_heavy + 64) {
    // Pick a random open attachment site.
    std::vector<int> open;
    for (int at = 0; at < mol.atom_count(); ++at)
      if (capacity(mol, at) >= 1) open.push_back(at);
    if (open.empty()) break;
    int at = open[static_cast<size_t>(rng.uniform_int(static_cast<int>(open.size())))];

    int room = target_heavy - mol.heavy_atom_count();
    if (room >= 6 && rng.bernoulli(opt.ring_prob * 0.4)) {
      graft_ring(mol, at,
                 kRingTemplates[rng.uniform_int(static_cast<int>(std::size(kRingTemplates)))]);
      continue;
    }
    if (opt.rgroup_prob > 0.0 && rgroups_used < 3 && rng.bernoulli(opt.rgroup_prob * 0.2)) {
      Atom r;
      r.symbol = "R" + std::to_string(rgroups_used + 1);
      int idx = mol.add_atom(r);
      mol.add_bond(at, idx, 1);
      ++rgroups_used;
      continue;
    }
    Atom next;
    next.symbol = pick_element(rng);
    int order = 1;
    int cap_at = capacity(mol, at);
    bool next_multi = next.symbol == "C" || next.symbol == "N" ||
                      next.symbol == "O" || next.symbol == "S";
    if (next_multi && cap_at >= 2 && !has_double_bond(mol, at)) {
      double roll = rng.uniform();
      if (roll < 0.16) order = 2;
      else if (roll < 0.18 && cap_at >= 3 && (next.symbol == "C" || next.symbol == "N")) order = 3;
    }
    if (order > 1 && (next.symbol == "O" || next.symbol == "S") && order == 3) order = 2;
    int idx = mol.add_atom(next);
    mol.add_bond(at, idx, order);
  }

  finalize_hydrogens(mol);
  sprinkle_stereo(mol, rng, opt.stereo_prob);
  return mol;
}

}  // namespace

chem::MolGraph random_molecule(uint64_t seed, const RandomMolOptions& opt) {
  if (opt.min_heavy < 3 || opt.max_heavy > 60 || opt.min_heavy > opt.max_heavy)
    fail(Err::BadConfig, "heavy-atom bounds must lie within [3, 60]");
  Rng rng(derive_seed(seed, "randmol"));
  bool window = opt.min_smiles > 0 || opt.max_smiles > 0;

  int lo = opt.min_heavy, hi = opt.max_heavy;
  if (window) {
    // A SMILES character count of L needs very roughly L heavy atoms at the
    // low end; bias the target so retries converge fast.
    lo = std::max(lo, std::min(hi, opt.min_smiles / 2 + 2));
  }

  MolGraph best;
  for (int attempt = 0; attempt < 500; ++attempt) {
    int target = lo + rng.uniform_int(hi - lo + 1);
    MolGraph mol = build_attempt(rng, opt, target);
    if (mol.heavy_atom_count() < opt.min_heavy || mol.heavy_atom_count() > opt.max_heavy)
      continue;
    std::string canon = chem::write_canonical(mol);
    int len = static_cast<int>(canon.size());
    if (window) {
      if (len < opt.min_smiles) {
        lo = std::min(hi, lo + 2);
        best = mol;
        continue;
      }
      if (len > opt.max_smiles) {
        lo = std::max(opt.min_heavy, lo - 2);
        hi = std::max(lo, hi - 2);
        best = mol;
        continue;
      }
    }
    return mol;
  }
  if (best.heavy_atom_count() >= opt.min_heavy) return best;
  // Retries exhausted without a single in-bounds draw: fall back to a plain
  // carbon chain so the call never aborts.
  MolGraph chain;
  for (int i = 0; i < opt.min_heavy; ++i) {
    Atom a;
    a.symbol = "C";
    int idx = chain.add_atom(a);
    if (idx > 0) chain.add_bond(idx - 1, idx, 1);
  }
  finalize_hydrogens(chain);
  return chain;
}

}  // namespace molgrep::render
