//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgrep/chem/vocab.hpp"

#include "molgrep/common.hpp"

namespace molgrep::chem {

Vocabulary::Vocabulary() {
  chars_ =
      "0123456789"
      "%()[]=#.-+@/\\"
      "ABCDEFGHIKLMNOPRSTUVWZ"
      "abcdegilmnoprstu";
  lookup_.fill(kUnk);
  for (size_t i = 0; i < chars_.size(); ++i)
    lookup_[static_cast<unsigned char>(chars_[i])] = static_cast<int>(i) + 4;
}

int Vocabulary::token_of(char c) const { return lookup_[static_cast<unsigned char>(c)]; }

char Vocabulary::char_of(int token) const {
  if (token < 4 || token >= size()) return '\0';
  return chars_[static_cast<size_t>(token - 4)];
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> tokens;
  tokens.reserve(text.size());
  for (char c : text) tokens.push_back(token_of(c));
  return tokens;
}

std::string Vocabulary::decode(const std::vector<int>& tokens) const {
  std::string text;
  for (int t : tokens) {
    if (t == kEnd) break;
    if (t == kStart || t == kPad) continue;
    if (t == kUnk) {
      text += '?';
      continue;
    }
    char c = char_of(t);
    if (c != '\0') text += c;
  }
  return text;
}

std::vector<int> tokenize(const Vocabulary& vocab, const std::string& text, int max_len) {
  if (max_len < static_cast<int>(text.size()) + 2)
    fail(Err::ShapeMismatch, "max_len leaves no room for the control tokens");
  std::vector<int> tokens;
  tokens.reserve(static_cast<size_t>(max_len));
  tokens.push_back(Vocabulary::kStart);
  for (char c : text) tokens.push_back(vocab.token_of(c));
  tokens.push_back(Vocabulary::kEnd);
  tokens.resize(static_cast<size_t>(max_len), Vocabulary::kPad);
  return tokens;
}

std::string detokenize(const Vocabulary& vocab, const std::vector<int>& tokens) {
  return vocab.decode(tokens);
}

}  // namespace molgrep::chem
