//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "molgrep/render/render.hpp"

namespace molgrep::render {

namespace {

using chem::MolGraph;
using Vec = std::array<double, 2>;

constexpr double kPi = 3.14159265358979323846;

Vec operator+(Vec a, Vec b) { return {a[0] + b[0], a[1] + b[1]}; }
Vec operator-(Vec a, Vec b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec operator*(double s, Vec a) { return {s * a[0], s * a[1]}; }
double norm(Vec a) { return std::hypot(a[0], a[1]); }
double cross(Vec a, Vec b) { return a[0] * b[1] - a[1] * b[0]; }

Vec unit_or(Vec a, Vec fallback) {
  double n = norm(a);
  return n < 1e-9 ? fallback : (1.0 / n) * a;
}

Vec from_angle(double a) { return {std::cos(a), std::sin(a)}; }

// One ring as an ordered atom cycle.
struct Ring {
  std::vector<int> atoms;
};

// A connected cluster of ring bonds with a rigid local geometry.
struct RingSystem {
  std::vector<int> atoms;
  std::vector<Ring> rings;
  std::map<int, Vec> local;  // atom -> local coordinates
  bool templated = false;    // local geometry built successfully
};

// Smallest cycle through a ring bond: shortest path between its endpoints
// with the bond itself removed.
std::vector<int> smallest_cycle(const MolGraph& mol, const std::vector<bool>& ring_bond,
                                int bond_idx) {
  int src = mol.bonds[bond_idx].a;
  int dst = mol.bonds[bond_idx].b;
  std::vector<int> prev(mol.atom_count(), -1);
  std::deque<int> queue{src};
  prev[src] = src;
  while (!queue.empty()) {
    int at = queue.front();
    queue.pop_front();
    if (at == dst) break;
    for (const MolGraph::Nbr& nb : mol.neighbors(at)) {
      if (!ring_bond[nb.bond] || nb.bond == bond_idx) continue;
      if (prev[nb.atom] != -1) continue;
      prev[nb.atom] = at;
      queue.push_back(nb.atom);
    }
  }
  std::vector<int> cycle;
  if (prev[dst] == -1) return cycle;
  for (int at = dst; at != src; at = prev[at]) cycle.push_back(at);
  cycle.push_back(src);
  return cycle;
}

// Builds the rigid local geometry of one ring system from regular polygons
// fused along shared edges or spiro atoms. Returns false for arrangements
// outside the template set (bridges, crowded fusions).
bool build_system_geometry(const MolGraph& mol, RingSystem& sys) {
  if (sys.rings.empty()) return false;
  std::vector<Vec> ring_centers;
  std::vector<bool> done(sys.rings.size(), false);

  auto place_polygon = [&](const Ring& ring, Vec center, double start_angle, double step) {
    double r = 0.5 / std::sin(kPi / static_cast<double>(ring.atoms.size()));
    for (size_t j = 0; j < ring.atoms.size(); ++j) {
      double a = start_angle + step * static_cast<double>(j);
      sys.local[ring.atoms[j]] = center + r * from_angle(a);
    }
    ring_centers.push_back(center);
  };

  {
    const Ring& first = sys.rings[0];
    double n = static_cast<double>(first.atoms.size());
    place_polygon(first, {0.0, 0.0}, kPi / 2.0, 2.0 * kPi / n);
    done[0] = true;
  }

  for (size_t round = 1; round < sys.rings.size(); ++round) {
    size_t pick = sys.rings.size();
    for (size_t k = 0; k < sys.rings.size(); ++k) {
      if (done[k]) continue;
      int placed = 0;
      for (int at : sys.rings[k].atoms) placed += sys.local.count(at) ? 1 : 0;
      if (placed > 0) {
        pick = k;
        break;
      }
    }
    if (pick == sys.rings.size()) return false;  // disconnected ring listing
    Ring ring = sys.rings[pick];
    done[pick] = true;
    int n = static_cast<int>(ring.atoms.size());
    std::vector<int> placed_ids;
    for (int at : ring.atoms)
      if (sys.local.count(at)) placed_ids.push_back(at);

    if (static_cast<int>(placed_ids.size()) == n) continue;  // checked globally later

    double r = 0.5 / std::sin(kPi / n);
    if (placed_ids.size() == 2) {
      // Edge fusion: the two placed atoms must be ring-adjacent.
      int a = placed_ids[0], b = placed_ids[1];
      int ia = -1, ib = -1;
      for (int j = 0; j < n; ++j) {
        if (ring.atoms[j] == a) ia = j;
        if (ring.atoms[j] == b) ib = j;
      }
      int gap = std::abs(ia - ib);
      if (gap != 1 && gap != n - 1) return false;
      // Rotate the cycle so it runs a, b, then the open atoms.
      std::vector<int> order(ring.atoms.begin(), ring.atoms.end());
      std::rotate(order.begin(), order.begin() + (gap == 1 ? std::min(ia, ib) : std::max(ia, ib)),
                  order.end());
      if (order[0] != a) std::swap(a, b);
      if (order[0] != a || order[1] != b) return false;

      Vec A = sys.local[a], B = sys.local[b];
      Vec mid = 0.5 * (A + B);
      Vec along = unit_or(B - A, {1.0, 0.0});
      Vec normal{-along[1], along[0]};
      double apothem = 0.5 / std::tan(kPi / n);
      // Build on the less crowded side of the shared edge.
      auto crowding = [&](Vec probe) {
        double score = 0.0;
        for (const auto& [at, p] : sys.local) {
          Vec d = p - probe;
          score += 1.0 / (d[0] * d[0] + d[1] * d[1] + 0.01);
        }
        return score;
      };
      Vec hi = mid + apothem * normal;
      Vec lo = mid - apothem * normal;
      Vec center = crowding(hi) <= crowding(lo) ? hi : lo;

      double theta_a = std::atan2(A[1] - center[1], A[0] - center[0]);
      double theta_b = std::atan2(B[1] - center[1], B[0] - center[0]);
      double step = 2.0 * kPi / n;
      double diff = theta_b - theta_a;
      while (diff > kPi) diff -= 2.0 * kPi;
      while (diff < -kPi) diff += 2.0 * kPi;
      if (diff < 0) step = -step;
      for (int j = 2; j < n; ++j) {
        int at = order[static_cast<size_t>(j)];
        if (sys.local.count(at)) return false;  // extra shared atom: bridged
        sys.local[at] = center + r * from_angle(theta_a + step * j);
      }
      ring_centers.push_back(center);
    } else if (placed_ids.size() == 1) {
      // Spiro: grow the polygon away from what is already built.
      int a = placed_ids[0];
      Vec A = sys.local[a];
      Vec centroid{0.0, 0.0};
      for (const auto& [at, p] : sys.local) centroid = centroid + p;
      centroid = (1.0 / static_cast<double>(sys.local.size())) * centroid;
      Vec dir = unit_or(A - centroid, {1.0, 0.0});
      Vec center = A + r * dir;
      std::vector<int> order(ring.atoms.begin(), ring.atoms.end());
      auto it = std::find(order.begin(), order.end(), a);
      std::rotate(order.begin(), it, order.end());
      double theta_a = std::atan2(A[1] - center[1], A[0] - center[0]);
      double step = 2.0 * kPi / n;
      for (int j = 1; j < n; ++j) {
        int at = order[static_cast<size_t>(j)];
        if (sys.local.count(at)) return false;
        sys.local[at] = center + r * from_angle(theta_a + step * j);
      }
      ring_centers.push_back(center);
    } else {
      return false;  // three or more pre-placed atoms: bridged system
    }
  }

  // Geometry audit: every ring bond near unit length, no coincident atoms.
  for (const chem::Bond& bond : mol.bonds) {
    auto ia = sys.local.find(bond.a);
    auto ib = sys.local.find(bond.b);
    if (ia == sys.local.end() || ib == sys.local.end()) continue;
    double d = norm(ia->second - ib->second);
    if (d < 0.8 || d > 1.2) return false;
  }
  for (auto i = sys.local.begin(); i != sys.local.end(); ++i)
    for (auto j = std::next(i); j != sys.local.end(); ++j)
      if (norm(i->second - j->second) < 0.3) return false;
  return true;
}

// Collects ring systems with smallest-ring decompositions and template
// geometry where available.
std::vector<RingSystem> find_ring_systems(const MolGraph& mol) {
  std::vector<bool> ring_bond = chem::ring_bond_flags(mol);
  std::vector<int> system_of(mol.atom_count(), -1);
  std::vector<RingSystem> systems;
  for (int start = 0; start < mol.atom_count(); ++start) {
    bool on_ring = false;
    for (const MolGraph::Nbr& nb : mol.neighbors(start)) on_ring |= ring_bond[nb.bond];
    if (!on_ring || system_of[start] != -1) continue;
    RingSystem sys;
    std::deque<int> queue{start};
    system_of[start] = static_cast<int>(systems.size());
    while (!queue.empty()) {
      int at = queue.front();
      queue.pop_front();
      sys.atoms.push_back(at);
      for (const MolGraph::Nbr& nb : mol.neighbors(at)) {
        if (!ring_bond[nb.bond] || system_of[nb.atom] != -1) continue;
        system_of[nb.atom] = system_of[start];
        queue.push_back(nb.atom);
      }
    }
    std::set<std::vector<int>> seen;
    for (int b = 0; b < mol.bond_count(); ++b) {
      if (!ring_bond[b]) continue;
      if (system_of[mol.bonds[b].a] != system_of[start]) continue;
      std::vector<int> cycle = smallest_cycle(mol, ring_bond, b);
      if (cycle.empty()) continue;
      std::vector<int> key(cycle);
      std::sort(key.begin(), key.end());
      if (seen.insert(key).second) sys.rings.push_back(Ring{cycle});
    }
    sys.templated = build_system_geometry(mol, sys);
    systems.push_back(std::move(sys));
  }
  return systems;
}

// Seeded spring embedding used whenever templates do not apply.
void spring_layout(const MolGraph& mol, const std::vector<int>& atoms, Rng& rng,
                   std::vector<Vec>& pos) {
  std::vector<bool> in_comp(pos.size(), false);
  for (int at : atoms) in_comp[static_cast<size_t>(at)] = true;
  std::vector<int> comp_bonds;
  for (int b = 0; b < mol.bond_count(); ++b)
    if (in_comp[static_cast<size_t>(mol.bonds[b].a)]) comp_bonds.push_back(b);

  double side = std::sqrt(static_cast<double>(atoms.size())) + 1.0;
  for (int at : atoms) pos[at] = {rng.uniform(0.0, side), rng.uniform(0.0, side)};
  std::vector<Vec> force(pos.size());
  for (int iter = 0; iter < 250; ++iter) {
    for (int at : atoms) force[at] = {0.0, 0.0};
    for (size_t i = 0; i < atoms.size(); ++i)
      for (size_t j = i + 1; j < atoms.size(); ++j) {
        int a = atoms[i], b = atoms[j];
        Vec d = pos[a] - pos[b];
        double dist = norm(d);
        if (dist > 2.5) continue;
        if (dist < 1e-6) {
          d = from_angle(0.1 * static_cast<double>(a + b));
          dist = 1e-6;
        }
        double f = 0.08 / (dist * dist + 0.05);
        force[a] = force[a] + (f / dist) * d;
        force[b] = force[b] - (f / dist) * d;
      }
    for (int b : comp_bonds) {
      const chem::Bond& bond = mol.bonds[static_cast<size_t>(b)];
      Vec d = pos[bond.b] - pos[bond.a];
      double dist = norm(d);
      if (dist < 1e-9) continue;
      double f = 0.35 * (dist - 1.0);
      force[bond.a] = force[bond.a] + (f / dist) * d;
      force[bond.b] = force[bond.b] - (f / dist) * d;
    }
    double cap = 0.12 * (1.0 - 0.8 * static_cast<double>(iter) / 250.0);
    for (int at : atoms) {
      double m = norm(force[at]);
      if (m > cap) force[at] = (cap / m) * force[at];
      pos[at] = pos[at] + force[at];
    }
  }
  // Projection passes tighten bonds to unit length.
  for (int iter = 0; iter < 60; ++iter)
    for (int b : comp_bonds) {
      const chem::Bond& bond = mol.bonds[static_cast<size_t>(b)];
      Vec d = pos[bond.b] - pos[bond.a];
      double dist = norm(d);
      if (dist < 1e-9) continue;
      double err = (dist - 1.0) / dist;
      pos[bond.a] = pos[bond.a] + (0.5 * err) * d;
      pos[bond.b] = pos[bond.b] - (0.5 * err) * d;
    }
}

struct Placer {
  const MolGraph& mol;
  const std::vector<RingSystem>& systems;
  std::vector<int> system_of;  // atom -> templated system index or -1
  std::vector<Vec>& pos;
  std::vector<bool> placed;
  std::vector<int> depth;
  std::vector<bool> pinned;

  Placer(const MolGraph& m, const std::vector<RingSystem>& sys, std::vector<Vec>& p)
      : mol(m), systems(sys), system_of(m.atom_count(), -1), pos(p),
        placed(m.atom_count(), false), depth(m.atom_count(), 0), pinned(m.atom_count(), false) {
    for (size_t s = 0; s < systems.size(); ++s)
      if (systems[s].templated)
        for (int at : systems[s].atoms) system_of[at] = static_cast<int>(s);
  }

  double child_angle(int parent) const {
    std::vector<double> occ;
    for (const MolGraph::Nbr& nb : mol.neighbors(parent))
      if (placed[nb.atom]) {
        Vec d = pos[nb.atom] - pos[parent];
        if (norm(d) > 1e-9) occ.push_back(std::atan2(d[1], d[0]));
      }
    if (occ.empty()) return -kPi / 6.0;
    if (occ.size() == 1)
      return occ[0] + (depth[parent] % 2 == 1 ? -1.0 : 1.0) * (2.0 * kPi / 3.0);
    std::sort(occ.begin(), occ.end());
    double best_gap = -1.0, best_angle = occ[0] + kPi;
    for (size_t i = 0; i < occ.size(); ++i) {
      double a = occ[i];
      double b = (i + 1 < occ.size()) ? occ[i + 1] : occ[0] + 2.0 * kPi;
      if (b - a > best_gap) {
        best_gap = b - a;
        best_angle = a + 0.5 * (b - a);
      }
    }
    return best_angle;
  }

  // Rigidly instantiates a templated ring system so `entry` lands at
  // `target` with the ring body extending along `dir`.
  void instantiate_system(int sys_idx, int entry, Vec target, Vec dir) {
    const RingSystem& sys = systems[static_cast<size_t>(sys_idx)];
    Vec e = sys.local.at(entry);
    Vec centroid{0.0, 0.0};
    for (const auto& [at, p] : sys.local) centroid = centroid + p;
    centroid = (1.0 / static_cast<double>(sys.local.size())) * centroid;
    Vec v = unit_or(centroid - e, {1.0, 0.0});
    double phi = std::atan2(dir[1], dir[0]) - std::atan2(v[1], v[0]);
    double c = std::cos(phi), s = std::sin(phi);
    for (const auto& [at, p] : sys.local) {
      Vec rel = p - e;
      pos[at] = target + Vec{c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]};
      placed[at] = true;
      pinned[at] = true;
    }
  }

  void run(const std::vector<int>& component) {
    int root = component[0];
    std::deque<std::pair<int, int>> queue;  // (atom, parent)
    if (system_of[root] != -1) {
      instantiate_system(system_of[root], root, {0.0, 0.0}, {1.0, 0.0});
      for (int at : systems[static_cast<size_t>(system_of[root])].atoms) {
        depth[at] = 0;
        queue.emplace_back(at, -1);
      }
    } else {
      pos[root] = {0.0, 0.0};
      placed[root] = true;
      queue.emplace_back(root, -1);
    }
    while (!queue.empty()) {
      auto [at, parent] = queue.front();
      queue.pop_front();
      for (const MolGraph::Nbr& nb : mol.neighbors(at)) {
        int child = nb.atom;
        if (placed[child]) continue;
        double angle = child_angle(at);
        Vec target = pos[at] + from_angle(angle);
        if (system_of[child] != -1) {
          instantiate_system(system_of[child], child, target, from_angle(angle));
          depth[child] = depth[at] + 1;
          for (int sat : systems[static_cast<size_t>(system_of[child])].atoms) {
            if (sat != child) depth[sat] = depth[at] + 2;
            queue.emplace_back(sat, at);
          }
        } else {
          pos[child] = target;
          placed[child] = true;
          depth[child] = depth[at] + 1;
          queue.emplace_back(child, at);
        }
      }
    }
  }
};

// Push-apart plus bond-length projection; pinned atoms never move.
void relax_overlaps(const MolGraph& mol, const std::vector<int>& atoms,
                    const std::vector<bool>& pinned, std::vector<Vec>& pos) {
  std::vector<bool> in_comp(pos.size(), false);
  for (int at : atoms) in_comp[static_cast<size_t>(at)] = true;
  std::vector<int> comp_bonds;
  for (int b = 0; b < mol.bond_count(); ++b)
    if (in_comp[static_cast<size_t>(mol.bonds[b].a)]) comp_bonds.push_back(b);

  auto overlapping = [&]() {
    for (size_t i = 0; i < atoms.size(); ++i)
      for (size_t j = i + 1; j < atoms.size(); ++j) {
        int a = atoms[i], b = atoms[j];
        if (mol.bond_between(a, b) != -1) continue;
        if (norm(pos[a] - pos[b]) < 0.68) return true;
      }
    return false;
  };
  if (!overlapping()) return;
  for (int iter = 0; iter < 160; ++iter) {
    for (size_t i = 0; i < atoms.size(); ++i)
      for (size_t j = i + 1; j < atoms.size(); ++j) {
        int a = atoms[i], b = atoms[j];
        if (mol.bond_between(a, b) != -1) continue;
        Vec d = pos[b] - pos[a];
        double dist = norm(d);
        if (dist >= 0.68) continue;
        if (dist < 1e-6) {
          d = from_angle(0.7 * static_cast<double>(a + 3 * b));
          dist = 1.0;
        }
        double push = std::min(0.5 * (0.68 - dist), 0.08);
        Vec step = (push / dist) * d;
        if (!pinned[a] && !pinned[b]) {
          pos[a] = pos[a] - step;
          pos[b] = pos[b] + step;
        } else if (!pinned[a]) {
          pos[a] = pos[a] - 2.0 * step;
        } else if (!pinned[b]) {
          pos[b] = pos[b] + 2.0 * step;
        }
      }
    for (int b : comp_bonds) {
      const chem::Bond& bond = mol.bonds[static_cast<size_t>(b)];
      Vec d = pos[bond.b] - pos[bond.a];
      double dist = norm(d);
      if (dist < 1e-9) continue;
      double err = (dist - 1.0) / dist;
      bool fa = !pinned[bond.a], fb = !pinned[bond.b];
      if (fa && fb) {
        pos[bond.a] = pos[bond.a] + (0.5 * err) * d;
        pos[bond.b] = pos[bond.b] - (0.5 * err) * d;
      } else if (fa) {
        pos[bond.a] = pos[bond.a] + err * d;
      } else if (fb) {
        pos[bond.b] = pos[bond.b] - err * d;
      }
    }
    if (!overlapping()) break;
  }
}

// Reflects drawn double-bond substituents until each recorded configuration
// matches the picture: the reference atoms of a cis bond must sit on the same
// side of the bond axis.
void enforce_cistrans(const MolGraph& mol, std::vector<Vec>& pos) {
  for (size_t b = 0; b < mol.bonds.size(); ++b) {
    const chem::Bond& bond = mol.bonds[b];
    if (!bond.has_cistrans || bond.ref_a < 0 || bond.ref_b < 0) continue;
    Vec A = pos[bond.a], B = pos[bond.b];
    Vec axis = B - A;
    if (norm(axis) < 1e-9) continue;
    double sa = cross(axis, pos[bond.ref_a] - A);
    double sb = cross(axis, pos[bond.ref_b] - B);
    bool drawn_cis = sa * sb > 0.0;
    if (drawn_cis == bond.cis) continue;
    // Mirror the b-side branch across the bond axis.
    std::vector<bool> side(pos.size(), false);
    std::deque<int> queue{bond.b};
    side[bond.b] = true;
    while (!queue.empty()) {
      int at = queue.front();
      queue.pop_front();
      for (const MolGraph::Nbr& nb : mol.neighbors(at)) {
        if (nb.bond == static_cast<int>(b) || side[nb.atom]) continue;
        side[nb.atom] = true;
        queue.push_back(nb.atom);
      }
    }
    if (side[bond.a]) continue;  // cyclic; leave as drawn
    Vec u = unit_or(axis, {1.0, 0.0});
    for (size_t at = 0; at < pos.size(); ++at) {
      if (!side[at]) continue;
      Vec rel = pos[at] - A;
      double along = rel[0] * u[0] + rel[1] * u[1];
      double perp = cross(u, rel);
      pos[at] = A + along * u + Vec{perp * u[1], -perp * u[0]};
    }
  }
}

}  // namespace

Layout2D generate_layout(const MolGraph& mol, uint64_t seed) {
  Layout2D out;
  out.pos.assign(static_cast<size_t>(mol.atom_count()), {0.0, 0.0});
  if (mol.atom_count() == 0) return out;

  Rng rng(derive_seed(seed, "layout"));
  std::vector<RingSystem> systems = find_ring_systems(mol);
  std::vector<std::vector<int>> components = chem::connected_components(mol);

  std::vector<bool> needs_spring(out.pos.size(), false);
  for (const RingSystem& sys : systems)
    if (!sys.templated)
      for (int at : sys.atoms) needs_spring[static_cast<size_t>(at)] = true;

  double shelf_x = 0.0;
  for (const std::vector<int>& component : components) {
    std::vector<Vec> pos(out.pos.size(), Vec{0.0, 0.0});
    Placer placer(mol, systems, pos);
    bool springy = false;
    for (int at : component) springy |= needs_spring[static_cast<size_t>(at)];
    std::vector<bool> pinned(out.pos.size(), false);
    if (springy) {
      Rng comp_rng = rng.fork("spring", static_cast<uint64_t>(component[0]));
      spring_layout(mol, component, comp_rng, pos);
    } else {
      placer.run(component);
      pinned = placer.pinned;
      relax_overlaps(mol, component, pinned, pos);
    }
    enforce_cistrans(mol, pos);

    // Pack components left to right on a shared baseline.
    double min_x = 1e30, max_x = -1e30, min_y = 1e30;
    for (int at : component) {
      min_x = std::min(min_x, pos[at][0]);
      max_x = std::max(max_x, pos[at][0]);
      min_y = std::min(min_y, pos[at][1]);
    }
    for (int at : component)
      out.pos[static_cast<size_t>(at)] = {pos[at][0] - min_x + shelf_x, pos[at][1] - min_y};
    shelf_x += (max_x - min_x) + 1.5;
  }

  // Distinct coordinates, deterministically.
  for (size_t i = 0; i < out.pos.size(); ++i)
    for (size_t j = i + 1; j < out.pos.size(); ++j) {
      Vec d = {out.pos[i][0] - out.pos[j][0], out.pos[i][1] - out.pos[j][1]};
      if (norm(d) < 1e-6)
        out.pos[j] = out.pos[j] + 0.05 * from_angle(0.9 * static_cast<double>(i + 2 * j));
    }
  return out;
}

}  // namespace molgrep::render
