// Copyright 2026 The mcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// NNCM model container, all integers little-endian:
//
//   "NNCM"            4-byte magic
//   u32 version       currently 1
//   u32 rank, u32 dims[rank]          network input shape
//   u32 layer_count
//   per layer:        u8 kind, u8 has_bias, u32 fields[6]
//                       dense:     in_units, out_units, 0, 0, 0, 0
//                       conv2d:    in_ch, out_ch, kernel_h, kernel_w, stride, padding
//                       maxpool2d: window, stride, 0, 0, 0, 0
//   per weighted layer: f64 weight[...] then f64 bias[units] if has_bias
//   u8 has_masks
//   if has_masks, per weighted layer: ceil(weights / 8) bytes, bit i of the
//   layer's flat weight index at byte i / 8, bit i % 8; 1 = kept.
//
// Kind codes: 0 dense, 1 conv2d, 2 relu, 3 maxpool2d, 4 flatten,
// 5 softmax-output.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcl/bytes.hpp"
#include "mcl/errors.hpp"
#include "mcl/layers.hpp"
#include "mcl/network.hpp"

namespace mcl {

inline constexpr std::array<std::uint8_t, 4> kNncmMagic{'N', 'N', 'C', 'M'};
inline constexpr std::uint32_t kNncmVersion = 1;

namespace detail {

inline std::uint8_t kind_code(LayerKind k) { return static_cast<std::uint8_t>(k); }

inline std::array<std::uint32_t, 6> layer_fields(const LayerSpec& s) {
  auto u = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
  switch (s.kind) {
    case LayerKind::kDense: return {u(s.in_units), u(s.out_units), 0, 0, 0, 0};
    case LayerKind::kConv2d:
      return {u(s.in_channels), u(s.out_channels), u(s.kernel_h),
              u(s.kernel_w),    u(s.stride),       u(s.padding)};
    case LayerKind::kMaxPool2d: return {u(s.window), u(s.stride), 0, 0, 0, 0};
    default: return {0, 0, 0, 0, 0, 0};
  }
}

inline LayerSpec decode_layer(std::uint8_t code, bool bias, const std::array<std::uint32_t, 6>& f,
                              std::size_t index) {
  switch (code) {
    case 0: return LayerSpec::dense(f[0], f[1], bias);
    case 1: return LayerSpec::conv2d(f[0], f[1], f[2], f[3], f[4], f[5], bias);
    case 2: return LayerSpec::relu();
    case 3: return LayerSpec::maxpool2d(f[0], f[1]);
    case 4: return LayerSpec::flatten();
    case 5: return LayerSpec::softmax_output();
    default:
      throw ParseError(ParseError::Kind::kBadLayer, "layer " + std::to_string(index + 1) +
                                                        ": unknown kind code " +
                                                        std::to_string(code));
  }
}

}  // namespace detail

inline Bytes encode_network(const Network& net) {
  ByteWriter out;
  out.raw(kNncmMagic);
  out.u32_le(kNncmVersion);
  out.u32_le(static_cast<std::uint32_t>(net.input_shape.size()));
  for (std::size_t d : net.input_shape) out.u32_le(static_cast<std::uint32_t>(d));
  out.u32_le(static_cast<std::uint32_t>(net.size()));
  for (const LayerSpec& s : net.layers) {
    out.u8(detail::kind_code(s.kind));
    out.u8(s.has_weights() && s.has_bias ? 1 : 0);
    for (std::uint32_t f : detail::layer_fields(s)) out.u32_le(f);
  }
  for (std::size_t l = 0; l < net.size(); ++l) {
    for (double v : net.params[l].weight.values()) out.f64_le(v);
    for (double v : net.params[l].bias.values()) out.f64_le(v);
  }
  out.u8(net.masks ? 1 : 0);
  if (net.masks) {
    for (std::size_t l = 0; l < net.size(); ++l) {
      const Tensor& m = net.masks->layers[l];
      if (!net.layers[l].has_weights()) continue;
      std::vector<std::uint8_t> packed((m.size() + 7) / 8, 0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] != 0.0) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      }
      out.raw(packed);
    }
  }
  return std::move(out.bytes());
}

inline Network decode_network(ByteView bytes, const std::string& name = "model") {
  using Kind = ParseError::Kind;
  ByteReader in(bytes, name);
  ByteView magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), kNncmMagic.begin())) {
    throw ParseError(Kind::kBadMagic, name + ": not an NNCM file (unexpected magic)");
  }
  const std::uint32_t version = in.u32_le();
  if (version != kNncmVersion) {
    throw ParseError(Kind::kBadVersion, name + ": unsupported NNCM version " +
                                            std::to_string(version));
  }
  const std::uint32_t rank = in.u32_le();
  if (rank == 0 || rank > 8) {
    throw ParseError(Kind::kBadLayer, name + ": input rank " + std::to_string(rank));
  }
  Shape input_shape(rank);
  for (auto& d : input_shape) {
    d = in.u32_le();
    if (d == 0) throw ParseError(Kind::kBadLayer, name + ": zero input extent");
  }
  const std::uint32_t count = in.u32_le();
  // Each layer record is 26 bytes; reject counts the buffer cannot hold.
  in.require(static_cast<std::size_t>(count) * 26);
  std::vector<LayerSpec> specs;
  specs.reserve(count);
  for (std::uint32_t l = 0; l < count; ++l) {
    const std::uint8_t code = in.u8();
    const std::uint8_t bias = in.u8();
    std::array<std::uint32_t, 6> f{};
    for (auto& v : f) v = in.u32_le();
    specs.push_back(detail::decode_layer(code, bias != 0, f, l));
  }
  Network net;
  net.layers = specs;
  net.input_shape = input_shape;
  try {
    net.output_shapes = infer_shapes(specs, input_shape);
  } catch (const ShapeError& e) {
    throw ParseError(Kind::kBadLayer, name + ": " + e.what());
  }
  net.num_outputs = net.output_shapes.back()[0];
  net.params.resize(count);
  auto read_tensor = [&](const Shape& shape) {
    // Guard the allocation: each extent is < 2^32 but their product may not fit.
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d != 0 && n > in.remaining() / 8 / d) in.require(SIZE_MAX);
      n *= d;
    }
    in.require(n * 8);
    std::vector<double> values(n);
    for (double& v : values) v = in.f64_le();
    return Tensor(shape, std::move(values));
  };
  for (std::size_t l = 0; l < count; ++l) {
    const LayerSpec& s = specs[l];
    if (!s.has_weights()) continue;
    net.params[l].weight = read_tensor(s.weight_shape());
    if (s.has_bias) net.params[l].bias = read_tensor({s.units()});
  }
  const std::uint8_t has_masks = in.u8();
  if (has_masks > 1) throw ParseError(Kind::kBadLayer, name + ": bad mask flag");
  if (has_masks) {
    MaskSet m;
    m.layers.resize(count);
    for (std::size_t l = 0; l < count; ++l) {
      if (!specs[l].has_weights()) continue;
      const Tensor& w = net.params[l].weight;
      ByteView packed = in.take((w.size() + 7) / 8);
      Tensor mt(w.shape(), 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) {
        mt[i] = (packed[i / 8] >> (i % 8)) & 1u ? 1.0 : 0.0;
        if (mt[i] == 0.0 && w[i] != 0.0) {
          throw ParseError(Kind::kBadLayer, name + ": masked weight " + std::to_string(i) +
                                                " of layer " + std::to_string(l + 1) +
                                                " is not zero");
        }
      }
      m.layers[l] = std::move(mt);
    }
    net.masks = std::move(m);
  }
  if (in.remaining() != 0) {
    throw ParseError(Kind::kBadLength, name + ": " + std::to_string(in.remaining()) +
                                           " trailing bytes");
  }
  return net;
}

inline void save_network(const Network& net, const std::filesystem::path& path) {
  write_file(path, encode_network(net));
}

inline Network load_network(const std::filesystem::path& path) {
  return decode_network(read_file(path), path.string());
}

}  // namespace mcl
