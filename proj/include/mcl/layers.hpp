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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mcl/errors.hpp"
#include "mcl/tensor.hpp"

namespace mcl {

enum class LayerKind { kDense, kConv2d, kRelu, kMaxPool2d, kFlatten, kSoftmaxOutput };

inline std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2d: return "maxpool2d";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kSoftmaxOutput: return "softmax-output";
  }
  return "?";
}

// Declarative description of one layer. Only the fields relevant to `kind`
// are meaningful; use the factory functions below.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  // dense
  std::size_t in_units = 0;
  std::size_t out_units = 0;
  // conv2d
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  // maxpool2d
  std::size_t window = 0;
  // dense and conv2d
  bool has_bias = true;

  static LayerSpec dense(std::size_t in, std::size_t out, bool bias = true) {
    LayerSpec s;
    s.kind = LayerKind::kDense;
    s.in_units = in;
    s.out_units = out;
    s.has_bias = bias;
    return s;
  }

  static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels,
                          std::size_t kernel_h, std::size_t kernel_w,
                          std::size_t stride = 1, std::size_t padding = 0,
                          bool bias = true) {
    LayerSpec s;
    s.kind = LayerKind::kConv2d;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel_h = kernel_h;
    s.kernel_w = kernel_w;
    s.stride = stride;
    s.padding = padding;
    s.has_bias = bias;
    return s;
  }

  static LayerSpec relu() { return LayerSpec{}; }

  static LayerSpec maxpool2d(std::size_t window, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::kMaxPool2d;
    s.window = window;
    s.stride = stride;
    return s;
  }

  static LayerSpec flatten() {
    LayerSpec s;
    s.kind = LayerKind::kFlatten;
    return s;
  }

  static LayerSpec softmax_output() {
    LayerSpec s;
    s.kind = LayerKind::kSoftmaxOutput;
    return s;
  }

  // Dense and conv layers carry weights and are the only prunable layers.
  bool has_weights() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv2d;
  }

  Shape weight_shape() const {
    if (kind == LayerKind::kDense) return {out_units, in_units};
    if (kind == LayerKind::kConv2d) {
      return {out_channels, in_channels, kernel_h, kernel_w};
    }
    return {};
  }

  std::size_t units() const {
    if (kind == LayerKind::kDense) return out_units;
    if (kind == LayerKind::kConv2d) return out_channels;
    return 0;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

namespace detail {

inline std::string shape_brief(const Shape& s) {
  return s.size() == 1 ? std::to_string(s[0]) : shape_string(s);
}

inline std::string layer_ref(std::size_t index) {
  return "layer " + std::to_string(index + 1);
}

}  // namespace detail

// Input shape a layer expects when it is the first layer, if it can be
// derived from the layer description alone.
inline Shape natural_input_shape(const LayerSpec& spec) {
  if (spec.kind == LayerKind::kDense) return {spec.in_units};
  return {};
}

// Output shape of layer `index` given its input shape. Errors name the
// offending layer pair (1-based).
inline Shape layer_output_shape(const LayerSpec& spec, const Shape& in,
                                std::size_t index) {
  auto mismatch = [&](const std::string& expected) {
    std::string prev = index == 0 ? std::string("input")
                                  : detail::layer_ref(index - 1) + " output";
    return ShapeError(prev + " " + detail::shape_brief(in) + " != " +
                      detail::layer_ref(index) + " input " + expected);
  };
  switch (spec.kind) {
    case LayerKind::kDense:
      if (spec.in_units == 0 || spec.out_units == 0) {
        throw ShapeError(detail::layer_ref(index) + ": dense extents must be positive");
      }
      if (in.size() != 1 || in[0] != spec.in_units) {
        throw mismatch(std::to_string(spec.in_units));
      }
      return {spec.out_units};
    case LayerKind::kConv2d: {
      if (spec.in_channels == 0 || spec.out_channels == 0 || spec.kernel_h == 0 ||
          spec.kernel_w == 0 || spec.stride == 0) {
        throw ShapeError(detail::layer_ref(index) + ": conv2d extents must be positive");
      }
      if (in.size() != 3 || in[0] != spec.in_channels) {
        throw mismatch("[" + std::to_string(spec.in_channels) + ",h,w]");
      }
      const std::size_t h = in[1] + 2 * spec.padding;
      const std::size_t w = in[2] + 2 * spec.padding;
      if (h < spec.kernel_h || w < spec.kernel_w) {
        throw ShapeError(detail::layer_ref(index) + ": kernel larger than padded input " +
                         shape_string(in));
      }
      return {spec.out_channels, (h - spec.kernel_h) / spec.stride + 1,
              (w - spec.kernel_w) / spec.stride + 1};
    }
    case LayerKind::kRelu:
      return in;
    case LayerKind::kMaxPool2d:
      if (spec.window == 0 || spec.stride == 0) {
        throw ShapeError(detail::layer_ref(index) + ": pool window and stride must be positive");
      }
      if (in.size() != 3 || in[1] < spec.window || in[2] < spec.window) {
        throw mismatch("[c,h>=" + std::to_string(spec.window) + ",w>=" +
                       std::to_string(spec.window) + "]");
      }
      return {in[0], (in[1] - spec.window) / spec.stride + 1,
              (in[2] - spec.window) / spec.stride + 1};
    case LayerKind::kFlatten:
      return {shape_size(in)};
    case LayerKind::kSoftmaxOutput:
      if (in.size() != 1) throw mismatch("[classes]");
      return in;
  }
  return in;
}

// Output shape of every layer; shapes[i] is the output of layer i.
inline std::vector<Shape> infer_shapes(const std::vector<LayerSpec>& specs,
                                       const Shape& input_shape) {
  if (specs.empty()) throw ShapeError("network needs at least one layer");
  if (input_shape.empty()) throw ShapeError("network input shape is empty");
  std::vector<Shape> shapes;
  shapes.reserve(specs.size());
  Shape current = input_shape;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].kind == LayerKind::kSoftmaxOutput && i + 1 != specs.size()) {
      throw ShapeError(detail::layer_ref(i) + ": softmax-output must be the last layer");
    }
    current = layer_output_shape(specs[i], current, i);
    shapes.push_back(current);
  }
  if (current.size() != 1) {
    throw ShapeError("network output must be a vector of class scores, got " +
                     shape_string(current));
  }
  return shapes;
}

}  // namespace mcl
