//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_CHEM_VOCAB_HPP_
#define MOLGREP_CHEM_VOCAB_HPP_

#include <array>
#include <string>
#include <vector>

namespace molgrep::chem {

// Character-level token inventory for structure strings. Four control
// tokens, then one token per supported character; 65 entries total. The
// inventory is fixed so checkpoints stay interchangeable.
class Vocabulary {
 public:
  static constexpr int kStart = 0;
  static constexpr int kEnd = 1;
  static constexpr int kUnk = 2;
  static constexpr int kPad = 3;

  Vocabulary();

  int size() const { return static_cast<int>(chars_.size()) + 4; }
  int token_of(char c) const;               // kUnk when unsupported
  char char_of(int token) const;            // '\0' for control tokens
  std::vector<int> encode(const std::string& text) const;
  // Concatenates character tokens; stops at kEnd, skips other controls,
  // renders kUnk as '?'.
  std::string decode(const std::vector<int>& tokens) const;
  const std::string& characters() const { return chars_; }

 private:
  std::string chars_;
  std::array<int, 256> lookup_;
};

// [START] + one token per character + [END], padded with [PAD] to exactly
// max_len entries. max_len must leave room for the two control tokens.
std::vector<int> tokenize(const Vocabulary& vocab, const std::string& text, int max_len);

// Inverse of tokenize on vocabulary-covered strings.
std::string detokenize(const Vocabulary& vocab, const std::vector<int>& tokens);

}  // namespace molgrep::chem

#endif  // MOLGREP_CHEM_VOCAB_HPP_
