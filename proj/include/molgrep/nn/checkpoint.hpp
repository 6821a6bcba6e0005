//
// Project molgrep - Copyright 2026 The molgrep Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGREP_NN_CHECKPOINT_HPP_
#define MOLGREP_NN_CHECKPOINT_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "molgrep/nn/adam.hpp"

namespace molgrep::nn {

// Checkpoint container: magic, format version, scalar width, a config echo
// string, then named tensors (name length + name + rank + dims + raw
// little-endian scalars). Optimizer state rides along as reserved entries
// "opt.m:<name>", "opt.v:<name>", and "opt.t" so a resumed run continues
// bit-exactly.
inline constexpr char kCheckpointMagic[8] = {'M', 'G', 'R', 'C', 'K', 'P', 'T', '1'};

namespace detail {

inline void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) fail(Err::Io, "truncated checkpoint " + path);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

template <typename T>
void put_tensor(std::ostream& os, const std::string& name, const Tensor<T>& t) {
  put_u32(os, static_cast<uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<uint32_t>(t.shape.size()));
  for (int d : t.shape) put_u32(os, static_cast<uint32_t>(d));
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.numel() * sizeof(T)));
}

template <typename T>
std::pair<std::string, Tensor<T>> get_tensor(std::istream& is, const std::string& path) {
  uint32_t name_len = get_u32(is, path);
  std::string name(name_len, '\0');
  if (!is.read(name.data(), name_len)) fail(Err::Io, "truncated checkpoint " + path);
  uint32_t rank = get_u32(is, path);
  std::vector<int> shape;
  for (uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<int>(get_u32(is, path)));
  Tensor<T> t(shape);
  if (!is.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.numel() * sizeof(T))))
    fail(Err::Io, "truncated checkpoint " + path);
  return {std::move(name), std::move(t)};
}

}  // namespace detail

template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& store,
                     const std::string& config_echo) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::Io, "cannot write checkpoint " + path);
  os.write(kCheckpointMagic, 8);
  detail::put_u32(os, 1);
  detail::put_u32(os, sizeof(T));
  detail::put_u32(os, static_cast<uint32_t>(config_echo.size()));
  os.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
  detail::put_u32(os, static_cast<uint32_t>(store.params.size() * 3 + 1));
  for (const auto& [name, p] : store.params) detail::put_tensor(os, name, p.value);
  for (const auto& [name, p] : store.params) detail::put_tensor(os, "opt.m:" + name, p.m);
  for (const auto& [name, p] : store.params) detail::put_tensor(os, "opt.v:" + name, p.v);
  Tensor<T> t({1});
  t[0] = static_cast<T>(store.step);
  detail::put_tensor(os, "opt.t", t);
  if (!os) fail(Err::Io, "write failure on checkpoint " + path);
}

// Replaces the store contents. Returns the config echo.
template <typename T>
std::string load_checkpoint(const std::string& path, ParamStore<T>& store) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Err::Io, "cannot read checkpoint " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    fail(Err::BadConfig, "not a checkpoint file: " + path);
  uint32_t version = detail::get_u32(is, path);
  if (version != 1) fail(Err::BadConfig, "unsupported checkpoint version");
  uint32_t width = detail::get_u32(is, path);
  if (width != sizeof(T))
    fail(Err::BadConfig, "checkpoint scalar width " + std::to_string(width) +
                             " does not match build width " + std::to_string(sizeof(T)));
  uint32_t config_len = detail::get_u32(is, path);
  std::string config(config_len, '\0');
  if (!is.read(config.data(), config_len)) fail(Err::Io, "truncated checkpoint " + path);

  store.params.clear();
  store.step = 0;
  uint32_t count = detail::get_u32(is, path);
  for (uint32_t i = 0; i < count; ++i) {
    auto [name, tensor] = detail::get_tensor<T>(is, path);
    if (name == "opt.t") {
      store.step = static_cast<long long>(tensor[0]);
    } else if (name.rfind("opt.m:", 0) == 0) {
      store.at(name.substr(6));
      store.params.find(name.substr(6))->second.m = std::move(tensor);
    } else if (name.rfind("opt.v:", 0) == 0) {
      store.at(name.substr(6));
      store.params.find(name.substr(6))->second.v = std::move(tensor);
    } else {
      store.add(name, std::move(tensor));
    }
  }
  return config;
}

}  // namespace molgrep::nn

#endif  // MOLGREP_NN_CHECKPOINT_HPP_
