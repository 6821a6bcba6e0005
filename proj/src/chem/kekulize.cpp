//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <vector>

#include "molgrep/chem/smiles.hpp"

namespace molgrep::chem {

namespace {

// An aromatic atom contributes one double bond to its ring system exactly
// when its charge-adjusted valence exceeds its sigma commitments (explicit
// bonds counted once, plus hydrogens). Everything else donates a lone pair.
std::vector<char> pi_needs(const MolGraph& mol) {
  std::vector<char> needs(mol.atom_count(), 0);
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& atom = mol.atoms[i];
    if (!atom.aromatic) continue;
    int sigma = mol.explicit_valence(i) + atom.implicit_h;
    int v = default_valence(atom.symbol, atom.charge, sigma);
    if (v < 0) {
      needs[i] = 0;
      continue;
    }
    needs[i] = static_cast<char>(std::clamp(v - sigma, 0, 1));
  }
  return needs;
}

struct MatchProblem {
  // Candidate edges: aromatic ring bonds between two pi-needing atoms.
  std::vector<int> cand_bonds;
  std::vector<std::vector<int>> atom_edges;  // atom -> indices into cand_bonds
  std::vector<int> pi_atoms;
};

MatchProblem build_problem(const MolGraph& mol, const std::vector<char>& needs) {
  MatchProblem prob;
  prob.atom_edges.resize(mol.atom_count());
  std::vector<bool> in_ring = ring_bond_flags(mol);
  for (int b = 0; b < mol.bond_count(); ++b) {
    const Bond& bond = mol.bonds[b];
    if (!bond.aromatic || !in_ring[b]) continue;
    if (!needs[bond.a] || !needs[bond.b]) continue;
    int e = static_cast<int>(prob.cand_bonds.size());
    prob.cand_bonds.push_back(b);
    prob.atom_edges[bond.a].push_back(e);
    prob.atom_edges[bond.b].push_back(e);
  }
  for (int i = 0; i < mol.atom_count(); ++i)
    if (needs[i]) prob.pi_atoms.push_back(i);
  return prob;
}

// Backtracking perfect matching over the candidate edges. The unmatched
// atom with the fewest open partners goes first; ranks break ties so the
// chosen assignment does not depend on atom input order.
bool match(const MolGraph& mol, const MatchProblem& prob, const std::vector<int>& ranks,
           std::vector<char>& matched_atom, std::vector<char>& used_edge) {
  int best = -1;
  std::pair<size_t, int> best_key{SIZE_MAX, 0};
  for (int atom : prob.pi_atoms) {
    if (matched_atom[atom]) continue;
    size_t options = 0;
    for (int e : prob.atom_edges[atom]) {
      const Bond& bond = mol.bonds[prob.cand_bonds[e]];
      if (!matched_atom[bond.other(atom)]) ++options;
    }
    if (options == 0) return false;
    std::pair<size_t, int> key{options, ranks[atom]};
    if (best < 0 || key < best_key) {
      best_key = key;
      best = atom;
    }
  }
  if (best < 0) return true;
  std::vector<int> edges = prob.atom_edges[best];
  std::sort(edges.begin(), edges.end(), [&](int x, int y) {
    const Bond& bx = mol.bonds[prob.cand_bonds[x]];
    const Bond& by = mol.bonds[prob.cand_bonds[y]];
    return ranks[bx.other(best)] < ranks[by.other(best)];
  });
  for (int e : edges) {
    const Bond& bond = mol.bonds[prob.cand_bonds[e]];
    int other = bond.other(best);
    if (matched_atom[other]) continue;
    matched_atom[best] = matched_atom[other] = 1;
    used_edge[e] = 1;
    if (match(mol, prob, ranks, matched_atom, used_edge)) return true;
    matched_atom[best] = matched_atom[other] = 0;
    used_edge[e] = 0;
  }
  return false;
}

}  // namespace

void kekulize(MolGraph& mol) {
  bool any = false;
  for (const Atom& atom : mol.atoms)
    if (atom.aromatic) any = true;
  for (const Bond& bond : mol.bonds)
    if (bond.aromatic) any = true;
  if (!any) return;

  std::vector<char> needs = pi_needs(mol);
  MatchProblem prob = build_problem(mol, needs);
  std::vector<int> ranks = invariant_ranks(mol);
  std::vector<char> matched_atom(mol.atom_count(), 0);
  std::vector<char> used_edge(prob.cand_bonds.size(), 0);
  if (!match(mol, prob, ranks, matched_atom, used_edge))
    fail(Err::KekulizationFailure, "no alternating bond assignment covers the aromatic atoms");

  for (size_t e = 0; e < prob.cand_bonds.size(); ++e) {
    if (used_edge[e]) {
      Bond& bond = mol.bonds[prob.cand_bonds[e]];
      bond.order = 2;
    }
  }
  for (Bond& bond : mol.bonds) {
    if (bond.aromatic) bond.aromatic = false;
  }
  for (Atom& atom : mol.atoms) atom.aromatic = false;
}

int count_kekule_assignments_bruteforce(const MolGraph& mol) {
  std::vector<char> needs = pi_needs(mol);
  MatchProblem prob = build_problem(mol, needs);
  int edge_count = static_cast<int>(prob.cand_bonds.size());
  std::vector<char> matched(mol.atom_count(), 0);
  int total = 0;

  // Enumerate subsets edge by edge; every pi-needing atom must end covered
  // exactly once.
  auto rec = [&](auto&& self, int e) -> void {
    if (e == edge_count) {
      for (int atom : prob.pi_atoms)
        if (!matched[atom]) return;
      ++total;
      return;
    }
    const Bond& bond = mol.bonds[prob.cand_bonds[e]];
    // Skip this edge; prune when skipping strands an atom whose remaining
    // edges are all earlier than e.
    self(self, e + 1);
    if (!matched[bond.a] && !matched[bond.b]) {
      matched[bond.a] = matched[bond.b] = 1;
      self(self, e + 1);
      matched[bond.a] = matched[bond.b] = 0;
    }
  };
  rec(rec, 0);
  return total;
}

}  // namespace molgrep::chem
