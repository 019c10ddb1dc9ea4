#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "deepirl/errors.hpp"
#include "deepirl/network.hpp"

namespace deepirl {

// Snapshot layout, all integers and floats little-endian:
//
//   "DIRLNET1"                      8-byte magic
//   u32 layer_count
//   layer_count x { u32 record_len = 12;
//                   u8 kind, u8 activation, u8 has_bias, u8 reserved = 0,
//                   u32 in, u32 out }
//   for each layer: weights then bias, as f64

inline constexpr char kSnapshotMagic[8] = {'D', 'I', 'R', 'L', 'N', 'E', 'T', '1'};
inline constexpr std::uint32_t kLayerRecordLength = 12;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 4);
}

inline void put_f64(std::ostream& os, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

inline void read_exact(std::istream& is, char* dst, std::size_t n) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw InvalidArgument("truncated model snapshot");
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  read_exact(is, reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  read_exact(is, reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const NetworkParams& params) {
  validate_params(params);
  os.write(kSnapshotMagic, sizeof kSnapshotMagic);
  detail::put_u32(os, static_cast<std::uint32_t>(params.specs.size()));
  for (const auto& spec : params.specs) {
    detail::put_u32(os, kLayerRecordLength);
    const char rec[4] = {static_cast<char>(spec.kind), static_cast<char>(spec.activation),
                         static_cast<char>(spec.bias ? 1 : 0), 0};
    os.write(rec, 4);
    detail::put_u32(os, static_cast<std::uint32_t>(spec.in));
    detail::put_u32(os, static_cast<std::uint32_t>(spec.out));
  }
  for (const auto& layer : params.layers) {
    for (double w : layer.weights) detail::put_f64(os, w);
    for (double b : layer.bias) detail::put_f64(os, b);
  }
}

inline NetworkParams read_snapshot(std::istream& is) {
  char magic[8];
  detail::read_exact(is, magic, 8);
  if (!std::equal(magic, magic + 8, kSnapshotMagic))
    throw InvalidArgument("not a model snapshot (bad magic)");

  const std::uint32_t count = detail::get_u32(is);
  if (count == 0 || count > 1024) throw InvalidArgument("implausible layer count in snapshot");
  std::vector<LayerSpec> specs;
  for (std::uint32_t l = 0; l < count; ++l) {
    const std::uint32_t len = detail::get_u32(is);
    if (len != kLayerRecordLength) throw InvalidArgument("unsupported layer record length");
    unsigned char rec[4];
    detail::read_exact(is, reinterpret_cast<char*>(rec), 4);
    if (rec[0] > 1 || rec[1] > 1 || rec[2] > 1) throw InvalidArgument("bad layer record in snapshot");
    LayerSpec spec;
    spec.kind = static_cast<LayerKind>(rec[0]);
    spec.activation = static_cast<Activation>(rec[1]);
    spec.bias = rec[2] == 1;
    spec.in = detail::get_u32(is);
    spec.out = detail::get_u32(is);
    specs.push_back(spec);
  }
  NetworkParams params = zero_params(std::move(specs));
  for (auto& layer : params.layers) {
    for (double& w : layer.weights) w = detail::get_f64(is);
    for (double& b : layer.bias) b = detail::get_f64(is);
  }
  return params;
}

inline void save_snapshot(const std::string& path, const NetworkParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_snapshot(os, params);
  if (!os) throw IoError("failed writing " + path);
}

inline NetworkParams load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace deepirl
