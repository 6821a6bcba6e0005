//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgrep/common.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace molgrep {

const char* err_name(Err e) {
  switch (e) {
    case Err::UnbalancedRing: return "UnbalancedRing";
    case Err::UnbalancedBranch: return "UnbalancedBranch";
    case Err::UnknownElement: return "UnknownElement";
    case Err::BadCharge: return "BadCharge";
    case Err::BadValence: return "BadValence";
    case Err::BadStereo: return "BadStereo";
    case Err::KekulizationFailure: return "KekulizationFailure";
    case Err::LayoutFailure: return "LayoutFailure";
    case Err::CanvasOverflow: return "CanvasOverflow";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::OddDimension: return "OddDimension";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::EmptyScaleList: return "EmptyScaleList";
    case Err::PlacementFailure: return "PlacementFailure";
    case Err::BadManifest: return "BadManifest";
    case Err::UnreadableImage: return "UnreadableImage";
    case Err::KeyMismatch: return "KeyMismatch";
    case Err::CorpusExhausted: return "CorpusExhausted";
    case Err::BadConfig: return "BadConfig";
    case Err::Io: return "Io";
  }
  return "Error";
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string strip(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::Io, "cannot write " + path);
  out << content;
  if (!out) fail(Err::Io, "short write to " + path);
}

int Tsv::col(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  fail(Err::BadManifest, "missing column '" + std::string(name) + "'");
}

Tsv read_tsv(const std::string& path) {
  std::string text = read_text_file(path);
  Tsv out;
  bool first = true;
  for (const std::string& line : split(text, '\n')) {
    if (line.empty()) continue;
    auto cells = split(line, '\t');
    if (first) {
      out.header = cells;
      first = false;
    } else {
      out.rows.push_back(cells);
    }
  }
  if (first) fail(Err::BadManifest, "empty TSV " + path);
  return out;
}

void write_tsv(const std::string& path, const Tsv& table) {
  std::ostringstream ss;
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) ss << '\t';
    ss << table.header[i];
  }
  ss << '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) ss << '\t';
      ss << row[i];
    }
    ss << '\n';
  }
  write_text_file(path, ss.str());
}

}  // namespace molgrep
