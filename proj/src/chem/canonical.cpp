//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "molgrep/chem/smiles.hpp"

namespace molgrep::chem {

namespace {

Parity flip(Parity p) {
  if (p == Parity::Clockwise) return Parity::CounterClockwise;
  if (p == Parity::CounterClockwise) return Parity::Clockwise;
  return p;
}

// Sign of the permutation taking `from` to `to`; both hold the same four
// distinct entries.
int perm_sign(const std::array<int, 4>& from, const std::array<int, 4>& to) {
  std::array<int, 4> pos{};
  for (int i = 0; i < 4; ++i) {
    pos[i] = -1;
    for (int j = 0; j < 4; ++j)
      if (to[i] == from[j]) {
        pos[i] = j;
        break;
      }
    if (pos[i] < 0) return 0;
  }
  int inversions = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (pos[i] > pos[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

// Stereo descriptors relative to a rank assignment. Zero means the mark is
// not expressible (substituent symmetry, ring double bond, damaged record)
// and must be dropped.
struct Desc {
  std::vector<int> tetra;  // 0 drop, 1 counterclockwise, 2 clockwise in rank order
  std::vector<int> ct;     // 0 drop, 1 low-rank refs same side, 2 opposite
};

Desc descriptors(const MolGraph& mol, const std::vector<int>& ranks,
                 const std::vector<bool>& ring_bond) {
  Desc d;
  d.tetra.assign(mol.atom_count(), 0);
  d.ct.assign(mol.bond_count(), 0);

  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& atom = mol.atoms[i];
    if (atom.parity == Parity::None) continue;
    const std::array<int, 4>& slots = atom.stereo_nbrs;
    std::array<int, 4> keys{};
    bool ok = true;
    for (int k = 0; k < 4; ++k) {
      int s = slots[k];
      if (s >= 0) {
        keys[k] = ranks[s];
        if (mol.atoms[s].symbol == "H") keys[k] = -2;  // pools with the implicit slot
      } else if (s == kStereoImplicitH) {
        keys[k] = -2;
      } else if (s == kStereoLonePair) {
        keys[k] = -3;
      } else {
        ok = false;
      }
    }
    for (int p = 0; p < 4 && ok; ++p)
      for (int q = p + 1; q < 4; ++q)
        if (keys[p] == keys[q]) ok = false;
    if (!ok) continue;

    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return keys[x] < keys[y]; });
    std::array<int, 4> sorted_slots{};
    for (int k = 0; k < 4; ++k) sorted_slots[k] = slots[order[k]];
    int sign = perm_sign(slots, sorted_slots);
    if (sign == 0) continue;
    Parity p = sign > 0 ? atom.parity : flip(atom.parity);
    d.tetra[i] = p == Parity::CounterClockwise ? 1 : 2;
  }

  for (int b = 0; b < mol.bond_count(); ++b) {
    const Bond& bond = mol.bonds[b];
    if (!bond.has_cistrans || bond.order != 2 || bond.aromatic) continue;
    if (ring_bond[b]) continue;
    int lowest[2];
    bool ok = true;
    int ends[2] = {bond.a, bond.b};
    int refs[2] = {bond.ref_a, bond.ref_b};
    for (int e = 0; e < 2 && ok; ++e) {
      std::vector<int> subs;
      for (const MolGraph::Nbr& n : mol.neighbors(ends[e])) {
        if (n.bond == b) continue;
        const Bond& nb = mol.bonds[n.bond];
        if (nb.order == 1 && !nb.aromatic) subs.push_back(n.atom);
      }
      if (subs.empty() || std::find(subs.begin(), subs.end(), refs[e]) == subs.end()) {
        ok = false;
        break;
      }
      int low = subs[0];
      for (int s : subs)
        if (ranks[s] < ranks[low]) low = s;
      for (int s : subs)
        if (s != low && ranks[s] == ranks[low]) ok = false;
      lowest[e] = low;
    }
    if (!ok) continue;
    bool same = bond.cis;
    if (lowest[0] != refs[0]) same = !same;
    if (lowest[1] != refs[1]) same = !same;
    d.ct[b] = same ? 1 : 2;
  }
  return d;
}

std::vector<int> dense_ranks(std::vector<std::pair<std::vector<long long>, int>>& keyed) {
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> ranks(keyed.size());
  int rank = 0;
  for (size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first != keyed[i - 1].first) ++rank;
    ranks[keyed[i].second] = rank;
  }
  return ranks;
}

int class_count(const std::vector<int>& ranks) {
  int maxr = -1;
  for (int r : ranks) maxr = std::max(maxr, r);
  return maxr + 1;
}

// Iterated neighborhood refinement: atoms start at the seed partition and
// split by the multiset of (bond key, neighbor rank) until stable.
std::vector<int> wl_refine(const MolGraph& mol, const std::vector<long long>& seed,
                           const std::vector<int>& bond_key) {
  int n = mol.atom_count();
  std::vector<std::pair<std::vector<long long>, int>> keyed(n);
  for (int i = 0; i < n; ++i) keyed[i] = {{seed[i]}, i};
  std::vector<int> ranks = dense_ranks(keyed);
  while (true) {
    int before = class_count(ranks);
    for (int i = 0; i < n; ++i) {
      std::vector<long long> key = {ranks[i]};
      std::vector<long long> nbrs;
      for (const MolGraph::Nbr& nb : mol.neighbors(i))
        nbrs.push_back(static_cast<long long>(bond_key[nb.bond]) * 1000000LL + ranks[nb.atom]);
      std::sort(nbrs.begin(), nbrs.end());
      key.insert(key.end(), nbrs.begin(), nbrs.end());
      keyed[i] = {std::move(key), i};
    }
    ranks = dense_ranks(keyed);
    if (class_count(ranks) == before) break;
  }
  return ranks;
}

// Refinement with stereo folded in, iterated to a joint fixpoint.
std::vector<int> converge(const MolGraph& mol, const std::vector<bool>& ring_bond,
                          const std::vector<long long>& seed) {
  std::vector<int> base_key(mol.bond_count());
  for (int b = 0; b < mol.bond_count(); ++b) base_key[b] = mol.bonds[b].order;
  std::vector<int> ranks = wl_refine(mol, seed, base_key);
  for (int round = 0; round <= mol.atom_count(); ++round) {
    Desc d = descriptors(mol, ranks, ring_bond);
    std::vector<long long> seed2(mol.atom_count());
    for (int i = 0; i < mol.atom_count(); ++i)
      seed2[i] = static_cast<long long>(ranks[i]) * 4 + d.tetra[i];
    std::vector<int> bond_key(mol.bond_count());
    for (int b = 0; b < mol.bond_count(); ++b) bond_key[b] = mol.bonds[b].order * 4 + d.ct[b];
    std::vector<int> next = wl_refine(mol, seed2, bond_key);
    if (next == ranks) break;
    ranks = std::move(next);
  }
  return ranks;
}

std::vector<long long> initial_seed(const MolGraph& mol) {
  std::vector<std::string> symbols;
  for (const Atom& atom : mol.atoms) symbols.push_back(atom.symbol);
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  std::vector<bool> ring_atom = ring_atom_flags(mol);
  std::vector<long long> seed(mol.atom_count());
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& atom = mol.atoms[i];
    long long sym = static_cast<long long>(
        std::lower_bound(symbols.begin(), symbols.end(), atom.symbol) - symbols.begin());
    long long key = sym;
    key = key * 16 + mol.degree(i);
    key = key * 64 + (atom.charge + 32);
    key = key * 16 + std::min(atom.implicit_h, 15);
    key = key * 2 + (ring_atom[i] ? 1 : 0);
    seed[i] = key;
  }
  return seed;
}

// --- canonical writer ---

struct StereoMask {
  std::vector<bool> tetra;
  std::vector<bool> ct;
};

class ComponentWriter {
 public:
  ComponentWriter(const MolGraph& mol, const std::vector<int>& ranks, const StereoMask& mask)
      : mol_(mol), ranks_(ranks), mask_(mask) {}

  std::string run() {
    int root = 0;
    for (int i = 0; i < mol_.atom_count(); ++i)
      if (ranks_[i] < ranks_[root]) root = i;
    build_tree(root);
    resolve_rings();
    assign_directions();
    emit(root);
    return out_;
  }

 private:
  const MolGraph& mol_;
  const std::vector<int>& ranks_;
  const StereoMask& mask_;

  std::vector<int> parent_, parent_bond_, preorder_;
  std::vector<std::vector<int>> children_;
  struct Ring {
    int open = -1, close = -1, bond = -1, digit = 0;
  };
  std::vector<Ring> rings_;
  std::vector<std::vector<int>> opens_at_, closes_at_;
  std::vector<signed char> dir_;       // per bond: 0, +1 '/', -1 '\'
  std::vector<int> written_first_;     // per bond: end written first
  std::string out_;

  void build_tree(int root) {
    int n = mol_.atom_count();
    parent_.assign(n, -1);
    parent_bond_.assign(n, -1);
    preorder_.assign(n, -1);
    children_.assign(n, {});
    written_first_.assign(mol_.bond_count(), -1);
    std::vector<char> used(mol_.bond_count(), 0);

    struct Frame {
      int atom;
      size_t next = 0;
      std::vector<MolGraph::Nbr> nbrs;
    };
    int counter = 0;
    auto sorted_nbrs = [&](int atom) {
      std::vector<MolGraph::Nbr> nbrs = mol_.neighbors(atom);
      std::sort(nbrs.begin(), nbrs.end(), [&](const MolGraph::Nbr& x, const MolGraph::Nbr& y) {
        int ox = mol_.bonds[x.bond].order;
        int oy = mol_.bonds[y.bond].order;
        if (ox != oy) return ox > oy;
        return ranks_[x.atom] < ranks_[y.atom];
      });
      return nbrs;
    };
    std::vector<Frame> stack;
    preorder_[root] = counter++;
    stack.push_back({root, 0, sorted_nbrs(root)});
    while (!stack.empty()) {
      Frame& frame = stack.back();
      if (frame.next >= frame.nbrs.size()) {
        stack.pop_back();
        continue;
      }
      MolGraph::Nbr nb = frame.nbrs[frame.next++];
      int u = frame.atom;
      if (nb.bond == parent_bond_[u]) continue;
      if (preorder_[nb.atom] >= 0) {
        if (!used[nb.bond]) {
          used[nb.bond] = 1;
          rings_.push_back({-1, -1, nb.bond, 0});
        }
        continue;
      }
      used[nb.bond] = 1;
      parent_[nb.atom] = u;
      parent_bond_[nb.atom] = nb.bond;
      written_first_[nb.bond] = u;
      preorder_[nb.atom] = counter++;
      children_[u].push_back(nb.atom);
      stack.push_back({nb.atom, 0, sorted_nbrs(nb.atom)});
    }
  }

  void resolve_rings() {
    opens_at_.assign(mol_.atom_count(), {});
    closes_at_.assign(mol_.atom_count(), {});
    for (size_t r = 0; r < rings_.size(); ++r) {
      const Bond& bond = mol_.bonds[rings_[r].bond];
      int open = preorder_[bond.a] < preorder_[bond.b] ? bond.a : bond.b;
      rings_[r].open = open;
      rings_[r].close = bond.other(open);
      written_first_[rings_[r].bond] = open;
      opens_at_[open].push_back(static_cast<int>(r));
      closes_at_[rings_[r].close].push_back(static_cast<int>(r));
    }
    for (auto& list : opens_at_)
      std::sort(list.begin(), list.end(),
                [&](int x, int y) { return preorder_[rings_[x].close] < preorder_[rings_[y].close]; });
    for (auto& list : closes_at_)
      std::sort(list.begin(), list.end(),
                [&](int x, int y) { return preorder_[rings_[x].open] < preorder_[rings_[y].open]; });
  }

  // Direction characters for single bonds flanking the double bonds that
  // keep their configuration. Sides are linked by parity constraints; a
  // conflicted constraint component loses its marks entirely.
  void assign_directions() {
    dir_.assign(mol_.bond_count(), 0);
    std::map<int, int> var_of;
    std::vector<int> bond_of;
    auto var = [&](int bond) {
      auto it = var_of.find(bond);
      if (it != var_of.end()) return it->second;
      int id = static_cast<int>(bond_of.size());
      var_of[bond] = id;
      bond_of.push_back(bond);
      return id;
    };
    auto dfac = [&](int bond, int end) { return written_first_[bond] == end ? 1 : -1; };

    struct Constraint {
      int x, y, sign;
    };
    std::vector<Constraint> constraints;
    for (int b = 0; b < mol_.bond_count(); ++b) {
      if (!mask_.ct[b]) continue;
      const Bond& bond = mol_.bonds[b];
      int ends[2] = {bond.a, bond.b};
      int ref_vars[2] = {-1, -1};
      int ref_d[2] = {0, 0};
      int refs[2] = {bond.ref_a, bond.ref_b};
      for (int e = 0; e < 2; ++e) {
        std::vector<std::pair<int, int>> singles;  // (bond, d factor)
        for (const MolGraph::Nbr& n : mol_.neighbors(ends[e])) {
          if (n.bond == b) continue;
          if (mol_.bonds[n.bond].order != 1) continue;
          singles.push_back({n.bond, dfac(n.bond, ends[e])});
          if (n.atom == refs[e]) {
            ref_vars[e] = var(n.bond);
            ref_d[e] = dfac(n.bond, ends[e]);
          }
        }
        for (size_t p = 0; p < singles.size(); ++p)
          for (size_t q = p + 1; q < singles.size(); ++q)
            constraints.push_back({var(singles[p].first), var(singles[q].first),
                                   -singles[p].second * singles[q].second});
      }
      if (ref_vars[0] < 0 || ref_vars[1] < 0) continue;
      int sign = (bond.cis ? 1 : -1) * ref_d[0] * ref_d[1];
      constraints.push_back({ref_vars[0], ref_vars[1], sign});
    }

    int vars = static_cast<int>(bond_of.size());
    std::vector<std::vector<std::pair<int, int>>> adj(vars);
    for (const Constraint& c : constraints) {
      adj[c.x].push_back({c.y, c.sign});
      adj[c.y].push_back({c.x, c.sign});
    }
    std::vector<int> value(vars, 0);
    std::vector<int> comp(vars, -1);
    for (int start = 0; start < vars; ++start) {
      if (comp[start] >= 0) continue;
      std::vector<int> members;
      bool conflict = false;
      value[start] = 1;
      comp[start] = start;
      std::vector<int> queue = {start};
      while (!queue.empty()) {
        int x = queue.back();
        queue.pop_back();
        members.push_back(x);
        for (auto [y, sign] : adj[x]) {
          int want = value[x] * sign;
          if (comp[y] < 0) {
            comp[y] = start;
            value[y] = want;
            queue.push_back(y);
          } else if (value[y] != want) {
            conflict = true;
          }
        }
      }
      if (conflict)
        for (int x : members) value[x] = 0;
    }
    for (int x = 0; x < vars; ++x)
      if (value[x] != 0) dir_[bond_of[x]] = static_cast<signed char>(value[x]);
  }

  Parity emitted_parity(int u) {
    const Atom& atom = mol_.atoms[u];
    std::vector<int> slots;
    if (parent_[u] >= 0) slots.push_back(parent_[u]);
    if (atom.implicit_h == 1) slots.push_back(kStereoImplicitH);
    for (int r : closes_at_[u]) slots.push_back(rings_[r].open);
    for (int r : opens_at_[u]) slots.push_back(rings_[r].close);
    for (int c : children_[u]) slots.push_back(c);
    if (slots.size() == 3 && atom.implicit_h == 0) {
      size_t at = parent_[u] >= 0 ? 1 : 0;
      slots.insert(slots.begin() + static_cast<long>(at), kStereoLonePair);
    }
    if (slots.size() != 4) return Parity::None;
    std::array<int, 4> emitted{slots[0], slots[1], slots[2], slots[3]};
    int sign = perm_sign(atom.stereo_nbrs, emitted);
    if (sign == 0) return Parity::None;
    return sign > 0 ? atom.parity : flip(atom.parity);
  }

  std::string atom_token(int u) {
    const Atom& atom = mol_.atoms[u];
    Parity parity = mask_.tetra[u] ? emitted_parity(u) : Parity::None;
    bool bracket = parity != Parity::None || atom.charge != 0 || atom.is_pseudo() ||
                   !organic_subset(atom.symbol);
    if (!bracket) {
      int ev = mol_.explicit_valence(u);
      int v = default_valence(atom.symbol, 0, ev);
      if (v < 0 || v - ev != atom.implicit_h) bracket = true;
    }
    if (!bracket) return atom.symbol;
    std::string token = "[" + atom.symbol;
    if (parity == Parity::CounterClockwise) token += "@";
    if (parity == Parity::Clockwise) token += "@@";
    if (atom.implicit_h == 1) token += "H";
    if (atom.implicit_h > 1) token += "H" + std::to_string(atom.implicit_h);
    if (atom.charge != 0) {
      token += atom.charge > 0 ? "+" : "-";
      int mag = std::abs(atom.charge);
      if (mag > 1) token += std::to_string(mag);
    }
    token += "]";
    return token;
  }

  std::string bond_token(int bond) {
    const Bond& b = mol_.bonds[bond];
    if (b.order == 2) return "=";
    if (b.order == 3) return "#";
    if (dir_[bond] > 0) return "/";
    if (dir_[bond] < 0) return "\\";
    return "";
  }

  std::string digit_token(int digit) {
    if (digit < 10) return std::string(1, static_cast<char>('0' + digit));
    return "%" + std::to_string(digit);
  }

  void emit(int root) {
    std::vector<char> busy(100, 0);
    auto alloc = [&]() {
      for (int d = 1; d < 100; ++d)
        if (!busy[d]) {
          busy[d] = 1;
          return d;
        }
      fail(Err::UnbalancedRing, "ring digit space exhausted");
    };
    std::function<void(int)> walk = [&](int u) {
      out_ += atom_token(u);
      for (int r : closes_at_[u]) {
        const Bond& b = mol_.bonds[rings_[r].bond];
        if (b.order == 2) out_ += "=";
        if (b.order == 3) out_ += "#";
        out_ += digit_token(rings_[r].digit);
        busy[rings_[r].digit] = 0;
      }
      for (int r : opens_at_[u]) {
        rings_[r].digit = alloc();
        out_ += bond_token(rings_[r].bond);
        out_ += digit_token(rings_[r].digit);
      }
      const std::vector<int>& kids = children_[u];
      for (size_t k = 0; k < kids.size(); ++k) {
        bool last = k + 1 == kids.size();
        if (!last) out_ += "(";
        out_ += bond_token(parent_bond_[kids[k]]);
        walk(kids[k]);
        if (!last) out_ += ")";
      }
    };
    walk(root);
  }
};

std::string canonical_component(const MolGraph& mol) {
  std::vector<bool> ring_bond = ring_bond_flags(mol);
  std::vector<int> ranks0 = converge(mol, ring_bond, initial_seed(mol));
  Desc d0 = descriptors(mol, ranks0, ring_bond);
  StereoMask mask;
  mask.tetra.resize(mol.atom_count());
  mask.ct.resize(mol.bond_count());
  for (int i = 0; i < mol.atom_count(); ++i) mask.tetra[i] = d0.tetra[i] != 0;
  for (int b = 0; b < mol.bond_count(); ++b) mask.ct[b] = d0.ct[b] != 0;

  std::string best;
  // Ties left after refinement are broken every possible way; the smallest
  // string wins, which keeps the result independent of input atom order.
  std::function<void(const std::vector<int>&)> explore = [&](const std::vector<int>& ranks) {
    int n = mol.atom_count();
    std::vector<int> count(n, 0);
    for (int r : ranks) ++count[r];
    int target = -1;
    for (int r = 0; r < n; ++r)
      if (count[r] > 1) {
        target = r;
        break;
      }
    if (target < 0) {
      std::string s = ComponentWriter(mol, ranks, mask).run();
      if (best.empty() || s < best) best = s;
      return;
    }
    for (int atom = 0; atom < n; ++atom) {
      if (ranks[atom] != target) continue;
      std::vector<long long> seed(n);
      for (int i = 0; i < n; ++i)
        seed[i] = static_cast<long long>(ranks[i]) * 2 + (i == atom ? 1 : 0);
      explore(converge(mol, ring_bond, seed));
    }
  };
  explore(ranks0);
  return best;
}

}  // namespace

std::vector<int> invariant_ranks(const MolGraph& mol) {
  std::vector<int> bond_key(mol.bond_count());
  for (int b = 0; b < mol.bond_count(); ++b)
    bond_key[b] = mol.bonds[b].order * 2 + (mol.bonds[b].aromatic ? 1 : 0);
  return wl_refine(mol, initial_seed(mol), bond_key);
}

std::string write_canonical(const MolGraph& mol_in) {
  MolGraph mol = mol_in;
  kekulize(mol);
  std::vector<std::string> parts;
  for (const std::vector<int>& comp : connected_components(mol))
    parts.push_back(canonical_component(subgraph(mol, comp)));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ".";
    out += parts[i];
  }
  return out;
}

MolGraph strip_salts(const MolGraph& mol) {
  std::vector<std::vector<int>> comps = connected_components(mol);
  if (comps.size() <= 1) return mol;
  MolGraph best_graph;
  int best_heavy = -1;
  double best_weight = -1.0;
  std::string best_canon;
  for (const std::vector<int>& comp : comps) {
    MolGraph g = subgraph(mol, comp);
    int heavy = g.heavy_atom_count();
    double weight = molecular_weight(g);
    std::string canon = write_canonical(g);
    bool better = false;
    if (heavy != best_heavy) {
      better = heavy > best_heavy;
    } else if (weight != best_weight) {
      better = weight > best_weight;
    } else {
      better = canon < best_canon;
    }
    if (better) {
      best_graph = std::move(g);
      best_heavy = heavy;
      best_weight = weight;
      best_canon = std::move(canon);
    }
  }
  return best_graph;
}

bool mol_equal(const MolGraph& a, const MolGraph& b) {
  return write_canonical(strip_salts(a)) == write_canonical(strip_salts(b));
}

bool smiles_equal(const std::string& a, const std::string& b) {
  return mol_equal(parse_smiles(a), parse_smiles(b));
}

double molecular_weight(const MolGraph& mol) {
  double total = 0.0;
  for (const Atom& atom : mol.atoms)
    total += atomic_weight(atom.symbol) + atom.implicit_h * atomic_weight("H");
  return total;
}

std::vector<std::pair<std::string, int>> element_counts(const MolGraph& mol) {
  std::map<std::string, int> counts;
  for (const Atom& atom : mol.atoms) {
    std::string key = atom.is_pseudo() ? "R" : atom.symbol;
    ++counts[key];
  }
  return {counts.begin(), counts.end()};
}

MolMetrics mol_metrics(const MolGraph& mol) {
  MolMetrics m;
  m.weight = molecular_weight(mol);
  m.heavy_atoms = mol.heavy_atom_count();
  m.smiles_length = static_cast<int>(write_canonical(mol).size());
  m.elements = element_counts(mol);
  return m;
}

}  // namespace molgrep::chem
