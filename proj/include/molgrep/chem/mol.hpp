//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_CHEM_MOL_HPP_
#define MOLGREP_CHEM_MOL_HPP_

#include <array>
#include <string>
#include <vector>

#include "molgrep/common.hpp"

namespace molgrep::chem {

// Tetrahedral parity is stated relative to Atom::stereo_nbrs: with the first
// entry pointing toward the viewer, the remaining three read clockwise or
// counterclockwise.
enum class Parity : uint8_t { None, Clockwise, CounterClockwise };

// Sentinels usable inside Atom::stereo_nbrs.
constexpr int kStereoImplicitH = -2;  // the implicit hydrogen's slot
constexpr int kStereoLonePair = -3;   // 3-coordinate centers without H
constexpr int kStereoUnused = -1;

struct Atom {
  std::string symbol;  // element symbol, or an attachment label "R1", "R2", ...
  int charge = 0;
  int implicit_h = 0;
  bool aromatic = false;
  Parity parity = Parity::None;
  std::array<int, 4> stereo_nbrs{kStereoUnused, kStereoUnused, kStereoUnused, kStereoUnused};

  bool is_pseudo() const { return !symbol.empty() && symbol[0] == 'R' && symbol.size() > 1; }
};

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;  // 1, 2, 3
  bool aromatic = false;

  // Double-bond configuration, resolved from directional marks: ref_a is a
  // neighbor of `a`, ref_b a neighbor of `b`; cis means the two references
  // lie on the same side of the bond axis.
  bool has_cistrans = false;
  int ref_a = -1;
  int ref_b = -1;
  bool cis = false;

  int other(int atom) const { return atom == a ? b : a; }
};

class MolGraph {
 public:
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int add_atom(Atom atom);
  // Returns the new bond index. Endpoints must be distinct, valid, and not
  // already bonded.
  int add_bond(int a, int b, int order, bool aromatic = false);

  int atom_count() const { return static_cast<int>(atoms.size()); }
  int bond_count() const { return static_cast<int>(bonds.size()); }

  // Bond index between two atoms, or -1.
  int bond_between(int a, int b) const;
  int degree(int atom) const { return static_cast<int>(adjacency_[atom].size()); }

  struct Nbr {
    int atom;
    int bond;
  };
  const std::vector<Nbr>& neighbors(int atom) const { return adjacency_[atom]; }

  // Sum of bond orders at an atom; aromatic bonds count 1.
  int explicit_valence(int atom) const;

  int heavy_atom_count() const;

 private:
  std::vector<std::vector<Nbr>> adjacency_;
};

// --- element data ---

bool known_element(const std::string& symbol);
bool organic_subset(const std::string& symbol);  // may be written without brackets
double atomic_weight(const std::string& symbol);  // pseudo atoms weigh 0

// Smallest allowed valence >= explicit_valence for the element/charge, or -1
// when the element has no valence model (pseudo atoms, bare metals).
int default_valence(const std::string& symbol, int charge, int explicit_valence);

// --- graph utilities ---

std::vector<std::vector<int>> connected_components(const MolGraph& mol);

// Extracts the induced subgraph; stereo neighbor lists and cis/trans
// references are remapped (they always stay inside a component).
MolGraph subgraph(const MolGraph& mol, const std::vector<int>& atom_ids);

// bond_in_ring[i] is true iff bond i lies on some cycle.
std::vector<bool> ring_bond_flags(const MolGraph& mol);
std::vector<bool> ring_atom_flags(const MolGraph& mol);

// Shortest-path distance matrix entryless helper: BFS distances from `from`.
std::vector<int> bfs_distances(const MolGraph& mol, int from);

// Permutation-invariant structural atom ranks from iterated neighborhood
// refinement (no stereo, no tie-breaking); equal rank marks atoms the
// refinement cannot tell apart.
std::vector<int> invariant_ranks(const MolGraph& mol);

}  // namespace molgrep::chem

#endif  // MOLGREP_CHEM_MOL_HPP_
