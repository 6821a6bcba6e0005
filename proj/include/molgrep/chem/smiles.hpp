//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_CHEM_SMILES_HPP_
#define MOLGREP_CHEM_SMILES_HPP_

#include <optional>
#include <string>
#include <vector>

#include "molgrep/chem/mol.hpp"

namespace molgrep::chem {

// Parses a SMILES string into a molecular graph. Implicit hydrogens are
// assigned, directional bond marks are resolved into per-bond cis/trans
// records, and tetrahedral marks into neighbor-order parities. Throws Error
// on malformed input.
MolGraph parse_smiles(const std::string& text);

// True when the string parses cleanly.
bool valid_smiles(const std::string& text);

// Converts aromatic rings to alternating single/double bonds in place.
// Throws Error{Err::KekulizationFailure} when no assignment exists.
void kekulize(MolGraph& mol);

// Exhaustive reference assignment search used to cross-check kekulize on
// small systems. Returns the number of distinct valid assignments.
int count_kekule_assignments_bruteforce(const MolGraph& mol);

// Emits the canonical form: kekulized, neighbor order fixed by canonical
// ranks, stereo marks normalized (dropped when the center or double bond is
// not stereogenic under rank symmetry). Aromatic input is kekulized on a
// copy first.
std::string write_canonical(const MolGraph& mol);

// Keeps only the largest covalent component: most heavy atoms, then largest
// molecular weight, then lexicographically smallest canonical string.
MolGraph strip_salts(const MolGraph& mol);

// Chemical identity: canonical forms equal after salt stripping and
// kekulization. Enantiomers and cis/trans isomers compare unequal.
bool mol_equal(const MolGraph& a, const MolGraph& b);
bool smiles_equal(const std::string& a, const std::string& b);

double molecular_weight(const MolGraph& mol);

// Multiset of element symbols, pseudo atoms under "R".
std::vector<std::pair<std::string, int>> element_counts(const MolGraph& mol);

struct MolMetrics {
  double weight = 0.0;
  int heavy_atoms = 0;
  int smiles_length = 0;  // characters in the canonical string
  std::vector<std::pair<std::string, int>> elements;
};

MolMetrics mol_metrics(const MolGraph& mol);

// One record per line; '#' lines and blank lines are skipped.
std::vector<std::string> read_smiles_lines(const std::string& path);

}  // namespace molgrep::chem

#endif  // MOLGREP_CHEM_SMILES_HPP_
