//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_COMMON_HPP_
#define MOLGREP_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace molgrep {

enum class Err {
  UnbalancedRing,
  UnbalancedBranch,
  UnknownElement,
  BadCharge,
  BadValence,
  BadStereo,
  KekulizationFailure,
  LayoutFailure,
  CanvasOverflow,
  ShapeMismatch,
  OddDimension,
  IndexOutOfRange,
  EmptyScaleList,
  PlacementFailure,
  BadManifest,
  UnreadableImage,
  KeyMismatch,
  CorpusExhausted,
  BadConfig,
  Io,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

// splitmix64; used to whiten seeds and derive independent streams.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_tag(std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derived streams are independent of each other and reproducible across
// platforms: mt19937_64 is bit-specified by the standard and all variate
// construction below avoids the implementation-defined std distributions.
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index = 0) {
  return splitmix64(master ^ hash_tag(tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

  uint64_t next() { return eng_(); }

  // [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0,n)
  int uniform_int(int n) { return n <= 1 ? 0 : static_cast<int>(next() % static_cast<uint64_t>(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0, u2 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Rng fork(std::string_view tag, uint64_t index = 0) {
    return Rng(derive_seed(next(), tag, index));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = next() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// --- small string helpers ---

std::vector<std::string> split(std::string_view s, char sep);
std::string strip(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// TSV with a header row; cells must not contain tab or newline.
struct Tsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(std::string_view name) const;
};

Tsv read_tsv(const std::string& path);
void write_tsv(const std::string& path, const Tsv& table);

}  // namespace molgrep

#endif  // MOLGREP_COMMON_HPP_
