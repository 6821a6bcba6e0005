//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgrep/chem/mol.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <queue>

namespace molgrep::chem {

int MolGraph::add_atom(Atom atom) {
  atoms.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<int>(atoms.size()) - 1;
}

int MolGraph::add_bond(int a, int b, int order, bool aromatic) {
  if (a < 0 || b < 0 || a >= atom_count() || b >= atom_count())
    fail(Err::IndexOutOfRange, "bond endpoint out of range");
  if (a == b) fail(Err::IndexOutOfRange, "self bond");
  if (bond_between(a, b) >= 0) fail(Err::IndexOutOfRange, "duplicate bond");
  Bond bond;
  bond.a = a;
  bond.b = b;
  bond.order = order;
  bond.aromatic = aromatic;
  bonds.push_back(bond);
  int idx = static_cast<int>(bonds.size()) - 1;
  adjacency_[a].push_back({b, idx});
  adjacency_[b].push_back({a, idx});
  return idx;
}

int MolGraph::bond_between(int a, int b) const {
  for (const Nbr& n : adjacency_[a])
    if (n.atom == b) return n.bond;
  return -1;
}

int MolGraph::explicit_valence(int atom) const {
  int total = 0;
  for (const Nbr& n : adjacency_[atom]) {
    const Bond& bond = bonds[n.bond];
    total += bond.aromatic ? 1 : bond.order;
  }
  return total;
}

int MolGraph::heavy_atom_count() const {
  int count = 0;
  for (const Atom& atom : atoms)
    if (atom.symbol != "H") ++count;
  return count;
}

namespace {

struct ElementInfo {
  double weight;
  std::vector<int> valences;  // empty: no hydrogen model
  bool organic;
};

const std::map<std::string, ElementInfo>& element_table() {
  static const std::map<std::string, ElementInfo> table = {
      {"H", {1.008, {1}, false}},
      {"Li", {6.94, {1}, false}},
      {"B", {10.81, {3}, true}},
      {"C", {12.011, {4}, true}},
      {"N", {14.007, {3}, true}},
      {"O", {15.999, {2}, true}},
      {"F", {18.998, {1}, true}},
      {"Na", {22.990, {1}, false}},
      {"Si", {28.085, {4}, false}},
      {"P", {30.974, {3, 5}, true}},
      {"S", {32.06, {2, 4, 6}, true}},
      {"Cl", {35.45, {1}, true}},
      {"K", {39.098, {1}, false}},
      {"Se", {78.971, {2, 4, 6}, false}},
      {"Br", {79.904, {1}, true}},
      {"Sn", {118.71, {4}, false}},
      {"I", {126.904, {1}, true}},
  };
  return table;
}

bool pseudo_symbol(const std::string& symbol) {
  if (symbol.size() < 2 || symbol[0] != 'R') return false;
  for (size_t i = 1; i < symbol.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(symbol[i]))) return false;
  return true;
}

}  // namespace

bool known_element(const std::string& symbol) {
  return pseudo_symbol(symbol) || element_table().count(symbol) > 0;
}

bool organic_subset(const std::string& symbol) {
  auto it = element_table().find(symbol);
  return it != element_table().end() && it->second.organic;
}

double atomic_weight(const std::string& symbol) {
  if (pseudo_symbol(symbol)) return 0.0;
  auto it = element_table().find(symbol);
  if (it == element_table().end()) fail(Err::UnknownElement, symbol);
  return it->second.weight;
}

int default_valence(const std::string& symbol, int charge, int explicit_valence) {
  if (pseudo_symbol(symbol)) return -1;
  auto it = element_table().find(symbol);
  if (it == element_table().end()) fail(Err::UnknownElement, symbol);
  std::vector<int> valences = it->second.valences;
  if (charge != 0) {
    // Cations of N/P/O/S/Se gain a bonding slot per charge, anions lose one;
    // boron runs the other way (borate binds four). Carbon and the rest lose
    // a slot per unit of charge of either sign.
    char head = symbol[0];
    bool group_1516 = symbol == "N" || symbol == "P" || symbol == "O" || symbol == "S" ||
                      symbol == "Se";
    for (int& v : valences) {
      if (group_1516)
        v += charge;
      else if (head == 'B' && symbol == "B")
        v -= charge;
      else
        v -= std::abs(charge);
      v = std::max(v, 0);
    }
  }
  std::sort(valences.begin(), valences.end());
  for (int v : valences)
    if (v >= explicit_valence) return v;
  return -1;
}

std::vector<std::vector<int>> connected_components(const MolGraph& mol) {
  std::vector<std::vector<int>> components;
  std::vector<char> seen(mol.atom_count(), 0);
  for (int start = 0; start < mol.atom_count(); ++start) {
    if (seen[start]) continue;
    std::vector<int> comp;
    std::vector<int> stack = {start};
    seen[start] = 1;
    while (!stack.empty()) {
      int at = stack.back();
      stack.pop_back();
      comp.push_back(at);
      for (const MolGraph::Nbr& n : mol.neighbors(at)) {
        if (!seen[n.atom]) {
          seen[n.atom] = 1;
          stack.push_back(n.atom);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

MolGraph subgraph(const MolGraph& mol, const std::vector<int>& atom_ids) {
  std::vector<int> remap(mol.atom_count(), -1);
  MolGraph out;
  for (int id : atom_ids) {
    if (id < 0 || id >= mol.atom_count()) fail(Err::IndexOutOfRange, "subgraph atom");
    remap[id] = out.add_atom(mol.atoms[id]);
  }
  auto remap_ref = [&](int ref) { return ref >= 0 ? remap[ref] : ref; };
  for (int id : atom_ids) {
    Atom& atom = out.atoms[remap[id]];
    for (int& s : atom.stereo_nbrs) s = remap_ref(s);
  }
  for (const Bond& bond : mol.bonds) {
    if (remap[bond.a] < 0 || remap[bond.b] < 0) continue;
    int idx = out.add_bond(remap[bond.a], remap[bond.b], bond.order, bond.aromatic);
    Bond& copy = out.bonds[idx];
    copy.has_cistrans = bond.has_cistrans;
    copy.ref_a = remap_ref(bond.ref_a);
    copy.ref_b = remap_ref(bond.ref_b);
    copy.cis = bond.cis;
  }
  return out;
}

namespace {

// Bridge detection: a bond is in a ring iff it is not a bridge.
struct BridgeFinder {
  const MolGraph& mol;
  std::vector<int> disc, low;
  std::vector<bool> bridge;
  int timer = 0;

  explicit BridgeFinder(const MolGraph& m)
      : mol(m), disc(m.atom_count(), -1), low(m.atom_count(), 0), bridge(m.bond_count(), false) {}

  void run() {
    for (int at = 0; at < mol.atom_count(); ++at)
      if (disc[at] < 0) dfs(at, -1);
  }

  void dfs(int root, int root_parent_bond) {
    // Iterative DFS; molecules can be long chains.
    struct Frame {
      int atom;
      int parent_bond;
      size_t next = 0;
    };
    std::vector<Frame> stack;
    stack.push_back({root, root_parent_bond});
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& frame = stack.back();
      const auto& nbrs = mol.neighbors(frame.atom);
      if (frame.next < nbrs.size()) {
        const MolGraph::Nbr n = nbrs[frame.next++];
        if (n.bond == frame.parent_bond) continue;
        if (disc[n.atom] < 0) {
          disc[n.atom] = low[n.atom] = timer++;
          stack.push_back({n.atom, n.bond});
        } else {
          low[frame.atom] = std::min(low[frame.atom], disc[n.atom]);
        }
      } else {
        int atom = frame.atom;
        int parent_bond = frame.parent_bond;
        stack.pop_back();
        if (!stack.empty()) {
          int parent = stack.back().atom;
          low[parent] = std::min(low[parent], low[atom]);
          if (low[atom] > disc[parent]) bridge[parent_bond] = true;
        }
      }
    }
  }
};

}  // namespace

std::vector<bool> ring_bond_flags(const MolGraph& mol) {
  BridgeFinder finder(mol);
  finder.run();
  std::vector<bool> in_ring(mol.bond_count());
  for (int i = 0; i < mol.bond_count(); ++i) in_ring[i] = !finder.bridge[i];
  return in_ring;
}

std::vector<bool> ring_atom_flags(const MolGraph& mol) {
  std::vector<bool> bond_flags = ring_bond_flags(mol);
  std::vector<bool> atom_flags(mol.atom_count(), false);
  for (int i = 0; i < mol.bond_count(); ++i) {
    if (bond_flags[i]) {
      atom_flags[mol.bonds[i].a] = true;
      atom_flags[mol.bonds[i].b] = true;
    }
  }
  return atom_flags;
}

std::vector<int> bfs_distances(const MolGraph& mol, int from) {
  std::vector<int> dist(mol.atom_count(), -1);
  std::queue<int> queue;
  dist[from] = 0;
  queue.push(from);
  while (!queue.empty()) {
    int at = queue.front();
    queue.pop();
    for (const MolGraph::Nbr& n : mol.neighbors(at)) {
      if (dist[n.atom] < 0) {
        dist[n.atom] = dist[at] + 1;
        queue.push(n.atom);
      }
    }
  }
  return dist;
}

}  // namespace molgrep::chem
