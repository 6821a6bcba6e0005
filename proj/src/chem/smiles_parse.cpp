//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "molgrep/chem/smiles.hpp"

namespace molgrep::chem {

namespace {

bool is_bond_char(char c) {
  return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\';
}

int bond_order_of(char c) {
  switch (c) {
    case '=': return 2;
    case '#': return 3;
    default: return 1;
  }
}

struct RingOpen {
  int atom = -1;
  char bond_char = 0;
  int event = -1;  // placeholder key inside the opening atom's stereo order
};

// A directional '/' or '\' single bond; `first` is the atom written first.
struct DirMark {
  int bond = -1;
  char ch = 0;
  int first = -1;
};

char flip_dir(char c) { return c == '/' ? '\\' : '/'; }

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  MolGraph run() {
    while (pos_ < text_.size()) step();
    if (!branch_stack_.empty()) fail(Err::UnbalancedBranch, "unclosed '('");
    if (pending_bond_ != 0) fail(Err::UnbalancedBranch, "dangling bond at end of input");
    if (!rings_.empty()) fail(Err::UnbalancedRing, "unclosed ring closure digit");
    assign_implicit_hydrogens();
    finalize_parities();
    resolve_cistrans();
    return std::move(mol_);
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;
  MolGraph mol_;
  int prev_ = -1;
  char pending_bond_ = 0;
  std::vector<int> branch_stack_;
  std::map<int, RingOpen> rings_;
  int next_event_ = 0;
  std::vector<DirMark> dir_marks_;
  // Written neighbor order per atom, for tetrahedral accounting. Entries
  // -(1000+event) are ring openings patched at closure time.
  std::vector<std::vector<int>> written_order_;
  std::vector<bool> chiral_;     // atom had an '@' mark
  std::vector<bool> bracketed_;  // atom was written in brackets
  std::vector<bool> has_from_;   // atom was bonded to a preceding atom

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char take() { return text_[pos_++]; }

  void step() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      if (prev_ < 0) fail(Err::UnbalancedBranch, "branch before any atom");
      if (pending_bond_ != 0) fail(Err::UnbalancedBranch, "bond before '('");
      branch_stack_.push_back(prev_);
      return;
    }
    if (c == ')') {
      ++pos_;
      if (branch_stack_.empty()) fail(Err::UnbalancedBranch, "unmatched ')'");
      if (pending_bond_ != 0) fail(Err::UnbalancedBranch, "dangling bond before ')'");
      prev_ = branch_stack_.back();
      branch_stack_.pop_back();
      return;
    }
    if (c == '.') {
      ++pos_;
      if (pending_bond_ != 0) fail(Err::UnbalancedBranch, "bond before '.'");
      prev_ = -1;
      return;
    }
    if (is_bond_char(c)) {
      ++pos_;
      if (pending_bond_ != 0) fail(Err::UnbalancedBranch, "two bond symbols in a row");
      if (prev_ < 0) fail(Err::UnbalancedBranch, "bond symbol before any atom");
      pending_bond_ = c;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
      ring_closure();
      return;
    }
    parse_atom();
  }

  void ring_closure() {
    int digit;
    if (peek() == '%') {
      ++pos_;
      if (pos_ + 2 > text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
        fail(Err::UnbalancedRing, "'%' needs two digits");
      digit = (take() - '0') * 10 + (take() - '0');
    } else {
      digit = take() - '0';
    }
    if (prev_ < 0) fail(Err::UnbalancedRing, "ring digit before any atom");
    char bond_char = pending_bond_;
    pending_bond_ = 0;

    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      RingOpen open;
      open.atom = prev_;
      open.bond_char = bond_char;
      open.event = next_event_++;
      written_order_[prev_].push_back(-(1000 + open.event));
      rings_[digit] = open;
      return;
    }
    RingOpen open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) fail(Err::UnbalancedRing, "ring closure onto same atom");

    // Merge the bond symbols written at the two positions. Directional marks
    // are stated from each end's own perspective, so they must be mirrored.
    char open_ch = open.bond_char;
    char close_ch = bond_char;
    char merged = 0;
    if (open_ch == 0) {
      merged = (close_ch == '/' || close_ch == '\\') ? flip_dir(close_ch) : close_ch;
    } else if (close_ch == 0) {
      merged = open_ch;
    } else if (open_ch == '/' || open_ch == '\\') {
      if (close_ch != flip_dir(open_ch))
        fail(Err::UnbalancedRing, "ring closure direction marks disagree");
      merged = open_ch;
    } else {
      if (open_ch != close_ch) fail(Err::UnbalancedRing, "ring closure bond symbols disagree");
      merged = open_ch;
    }

    bool aromatic = merged == ':' ||
                    (merged == 0 && mol_.atoms[open.atom].aromatic && mol_.atoms[prev_].aromatic);
    int order = aromatic ? 1 : bond_order_of(merged);
    int bond;
    try {
      bond = mol_.add_bond(open.atom, prev_, order, aromatic);
    } catch (const Error&) {
      fail(Err::UnbalancedRing, "duplicate ring bond");
    }
    if (merged == '/' || merged == '\\') dir_marks_.push_back({bond, merged, open.atom});

    // Patch the opening atom's reserved slot; record the closing side now.
    for (int& slot : written_order_[open.atom])
      if (slot == -(1000 + open.event)) slot = prev_;
    written_order_[prev_].push_back(open.atom);
  }

  void parse_atom() {
    char c = peek();
    Atom atom;
    bool bracket = false;
    int h_count = -1;  // -1: not specified

    if (c == '[') {
      bracket = true;
      ++pos_;
      parse_bracket_body(atom, h_count);
    } else {
      atom.symbol = read_bare_symbol();
      if (atom.symbol.empty()) fail(Err::UnknownElement, std::string("unexpected '") + c + "'");
      if (std::islower(static_cast<unsigned char>(atom.symbol[0]))) {
        atom.aromatic = true;
        atom.symbol[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(atom.symbol[0])));
      }
      if (!organic_subset(atom.symbol))
        fail(Err::UnknownElement, atom.symbol + " requires brackets");
    }

    int idx = mol_.add_atom(atom);
    written_order_.emplace_back();
    chiral_.push_back(mol_.atoms[idx].parity != Parity::None);
    bracketed_.push_back(bracket);
    has_from_.push_back(prev_ >= 0);

    if (prev_ >= 0) {
      char bond_char = pending_bond_;
      pending_bond_ = 0;
      bool aromatic = bond_char == ':' || (bond_char == 0 && mol_.atoms[prev_].aromatic &&
                                           mol_.atoms[idx].aromatic);
      int order = aromatic ? 1 : bond_order_of(bond_char);
      int bond = mol_.add_bond(prev_, idx, order, aromatic);
      if (bond_char == '/' || bond_char == '\\') dir_marks_.push_back({bond, bond_char, prev_});
      written_order_[idx].push_back(prev_);
      written_order_[prev_].push_back(idx);
    } else if (pending_bond_ != 0) {
      fail(Err::UnbalancedBranch, "bond with no preceding atom");
    }

    // With an explicit hydrogen count the hydrogen occupies the slot right
    // after the preceding atom (or the first slot at a chain start).
    if (chiral_.back() && h_count == 1) written_order_[idx].push_back(kStereoImplicitH);

    prev_ = idx;
  }

  std::string read_bare_symbol() {
    char c = peek();
    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      pos_ += 2;
      return "Cl";
    }
    if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      pos_ += 2;
      return "Br";
    }
    static const std::string uppers = "BCNOPSFI";
    static const std::string lowers = "bcnops";
    if (uppers.find(c) != std::string::npos || lowers.find(c) != std::string::npos) {
      ++pos_;
      return std::string(1, c);
    }
    return {};
  }

  void parse_bracket_body(Atom& atom, int& h_count) {
    if (std::isdigit(static_cast<unsigned char>(peek())))
      fail(Err::UnknownElement, "isotope labels not supported");

    // Symbol: attachment label R<n>, else longest known element, aromatic
    // forms in lowercase.
    char c = peek();
    if (c == 'R' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      ++pos_;
      std::string label = "R";
      while (std::isdigit(static_cast<unsigned char>(peek()))) label += take();
      atom.symbol = label;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string two, one(1, c);
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1])) &&
          std::isupper(static_cast<unsigned char>(c)))
        two = std::string(1, c) + text_[pos_ + 1];
      std::string lower_two;
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(c)) &&
          std::islower(static_cast<unsigned char>(text_[pos_ + 1])))
        lower_two = std::string(1, c) + text_[pos_ + 1];

      if (!two.empty() && known_element(two)) {
        atom.symbol = two;
        pos_ += 2;
      } else if (lower_two == "se") {
        atom.symbol = "Se";
        atom.aromatic = true;
        pos_ += 2;
      } else if (std::islower(static_cast<unsigned char>(c))) {
        std::string up(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (!known_element(up) || !organic_subset(up))
          fail(Err::UnknownElement, std::string("aromatic ") + c);
        atom.symbol = up;
        atom.aromatic = true;
        ++pos_;
      } else if (known_element(one)) {
        atom.symbol = one;
        ++pos_;
      } else {
        fail(Err::UnknownElement, one);
      }
    } else {
      fail(Err::UnknownElement, std::string("bad bracket atom '") + c + "'");
    }

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        ++pos_;
        atom.parity = Parity::Clockwise;
      } else {
        atom.parity = Parity::CounterClockwise;
      }
    }

    if (peek() == 'H') {
      ++pos_;
      h_count = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) h_count = take() - '0';
    }

    if (peek() == '+' || peek() == '-') {
      int sign = take() == '+' ? 1 : -1;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = take() - '0';
        if (std::isdigit(static_cast<unsigned char>(peek()))) magnitude = magnitude * 10 + (take() - '0');
      } else {
        while (peek() == (sign > 0 ? '+' : '-')) {
          ++pos_;
          ++magnitude;
        }
      }
      atom.charge = sign * magnitude;
      if (std::abs(atom.charge) > 9) fail(Err::BadCharge, "charge magnitude beyond 9");
    }

    if (peek() != ']') fail(Err::UnknownElement, "expected ']'");
    ++pos_;

    if (h_count < 0) h_count = 0;
    atom.implicit_h = h_count;
    if (atom.parity != Parity::None && h_count >= 2) atom.parity = Parity::None;
  }

  void assign_implicit_hydrogens() {
    for (int i = 0; i < mol_.atom_count(); ++i) {
      Atom& atom = mol_.atoms[i];
      if (bracketed_[i]) continue;  // bracket hydrogen counts are explicit
      int ev = mol_.explicit_valence(i);
      int v = default_valence(atom.symbol, 0, ev);
      if (v < 0) fail(Err::BadValence, atom.symbol + " with valence " + std::to_string(ev));
      if (atom.aromatic) {
        // One ring bond is expected to carry the second order; an atom that
        // cannot afford it contributes its lone pair instead.
        int h = v - ev - 1;
        atom.implicit_h = h >= 0 ? h : v - ev;
      } else {
        atom.implicit_h = v - ev;
      }
    }
  }

  void finalize_parities() {
    for (int i = 0; i < mol_.atom_count(); ++i) {
      Atom& atom = mol_.atoms[i];
      if (atom.parity == Parity::None) continue;
      std::vector<int> order = written_order_[i];
      bool has_h_slot = std::find(order.begin(), order.end(), kStereoImplicitH) != order.end();
      if (order.size() == 3 && !has_h_slot && atom.implicit_h == 0) {
        // Three-coordinate center: the lone pair takes the slot an explicit
        // hydrogen would have, right after the preceding atom (first at a
        // chain start).
        size_t at = has_from_[i] ? 1 : 0;
        order.insert(order.begin() + static_cast<long>(at), kStereoLonePair);
      }
      if (order.size() != 4) {
        atom.parity = Parity::None;
        continue;
      }
      for (size_t k = 0; k < 4; ++k) atom.stereo_nbrs[k] = order[k];
    }
  }

  void resolve_cistrans() {
    for (Bond& bond : mol_.bonds) {
      if (bond.order != 2 || bond.aromatic) continue;
      int ref[2] = {-1, -1};
      int side[2] = {0, 0};
      int ends[2] = {bond.a, bond.b};
      for (int e = 0; e < 2; ++e) {
        int end = ends[e];
        for (const DirMark& mark : dir_marks_) {
          const Bond& mb = mol_.bonds[mark.bond];
          if (mb.a != end && mb.b != end) continue;
          int sub = mb.other(end);
          if (sub == bond.other(end)) continue;
          int s = (mark.ch == '/' ? 1 : -1) * (mark.first == end ? 1 : -1);
          if (ref[e] < 0) {
            ref[e] = sub;
            side[e] = s;
          } else if (ref[e] != sub && s == side[e]) {
            fail(Err::BadStereo, "conflicting direction marks at a double bond");
          }
        }
      }
      if (ref[0] >= 0 && ref[1] >= 0) {
        bond.has_cistrans = true;
        bond.ref_a = ref[0];
        bond.ref_b = ref[1];
        bond.cis = side[0] == side[1];
      }
    }
  }
};

}  // namespace

MolGraph parse_smiles(const std::string& text) {
  if (text.empty()) fail(Err::UnknownElement, "empty input");
  for (char c : text)
    if (std::isspace(static_cast<unsigned char>(c)))
      fail(Err::UnknownElement, "whitespace in input");
  return Parser(text).run();
}

bool valid_smiles(const std::string& text) {
  try {
    parse_smiles(text);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<std::string> read_smiles_lines(const std::string& path) {
  std::vector<std::string> lines;
  for (const std::string& raw : split(read_text_file(path), '\n')) {
    std::string line = strip(raw);
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace molgrep::chem
