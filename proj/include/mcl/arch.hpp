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

// Compact architecture strings.
//
//   arch  := item (',' item)*
//   item  := 'in:' N ('x' N)*            input shape, first item only
//          | 'dense:' N ('-' N)+         chain of dense layers, N0 -> N1 -> ...
//          | 'conv:' C 'k' K ['s' S] ['p' P]
//                                        conv2d, C output channels, K x K kernel
//          | 'pool:' W ['s' S]           max pooling, stride defaults to W
//          | 'flatten'
//          | 'relu'                      ReLU after every layer of the previous
//                                        item, except the network's last layer
//
// A flatten is inserted automatically before a dense chain that follows an
// image-shaped layer. Examples:
//
//   dense:784-128-64-10,relu
//   in:1x28x28,conv:8k3p1,relu,pool:2,dense:1568-10

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mcl/errors.hpp"
#include "mcl/layers.hpp"
#include "mcl/tensor.hpp"

namespace mcl {

struct Architecture {
  std::vector<LayerSpec> layers;
  Shape input_shape;
};

namespace detail {

inline ConfigError arch_error(std::string_view item, const std::string& why) {
  return ConfigError("architecture item '" + std::string(item) + "': " + why);
}

// Parses a positive integer at the front of `s` and advances past it.
inline std::size_t take_number(std::string_view& s, std::string_view item) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || v == 0) throw arch_error(item, "expected a positive integer");
  s.remove_prefix(static_cast<std::size_t>(p - s.data()));
  return v;
}

inline std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace detail

inline Architecture parse_architecture(std::string_view text) {
  Architecture arch;
  std::vector<std::vector<LayerSpec>> items;
  Shape current;
  bool last_was_relu = false;
  const auto tokens = detail::split_on(text, ',');
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::string_view item = tokens[t];
    if (item.empty()) throw ConfigError("architecture has an empty item");
    if (item == "relu") {
      if (items.empty() || last_was_relu) {
        throw detail::arch_error(item, "must follow a layer item");
      }
      std::vector<LayerSpec> with_relu;
      for (const LayerSpec& s : items.back()) {
        with_relu.push_back(s);
        if (s.kind != LayerKind::kFlatten) with_relu.push_back(LayerSpec::relu());
      }
      items.back() = std::move(with_relu);
      last_was_relu = true;
      continue;
    }
    last_was_relu = false;
    if (item.starts_with("in:")) {
      if (t != 0) throw detail::arch_error(item, "input shape must come first");
      std::string_view rest = item.substr(3);
      for (std::string_view d : detail::split_on(rest, 'x')) {
        std::string_view tmp = d;
        arch.input_shape.push_back(detail::take_number(tmp, item));
        if (!tmp.empty()) throw detail::arch_error(item, "unexpected '" + std::string(tmp) + "'");
      }
      current = arch.input_shape;
      continue;
    }
    std::vector<LayerSpec> layers;
    if (item.starts_with("dense:")) {
      const auto parts = detail::split_on(item.substr(6), '-');
      if (parts.size() < 2) throw detail::arch_error(item, "needs at least two sizes");
      std::vector<std::size_t> sizes;
      for (std::string_view p : parts) {
        std::string_view tmp = p;
        sizes.push_back(detail::take_number(tmp, item));
        if (!tmp.empty()) throw detail::arch_error(item, "unexpected '" + std::string(tmp) + "'");
      }
      if (current.empty()) {
        current = {sizes[0]};
        arch.input_shape = current;
      }
      if (current.size() > 1) {
        layers.push_back(LayerSpec::flatten());
        current = {shape_size(current)};
      }
      if (current[0] != sizes[0]) {
        throw detail::arch_error(item, "input width " + std::to_string(sizes[0]) +
                                           " does not match preceding width " +
                                           std::to_string(current[0]));
      }
      for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        layers.push_back(LayerSpec::dense(sizes[i], sizes[i + 1]));
      }
      current = {sizes.back()};
    } else if (item.starts_with("conv:")) {
      if (current.size() != 3) throw detail::arch_error(item, "needs an image-shaped input");
      std::string_view rest = item.substr(5);
      const std::size_t channels = detail::take_number(rest, item);
      if (!rest.starts_with('k')) throw detail::arch_error(item, "expected 'k<kernel>'");
      rest.remove_prefix(1);
      const std::size_t kernel = detail::take_number(rest, item);
      std::size_t stride = 1, padding = 0;
      if (rest.starts_with('s')) {
        rest.remove_prefix(1);
        stride = detail::take_number(rest, item);
      }
      if (rest.starts_with('p')) {
        rest.remove_prefix(1);
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
        if (ec != std::errc()) throw detail::arch_error(item, "bad padding");
        padding = v;
        rest.remove_prefix(static_cast<std::size_t>(p - rest.data()));
      }
      if (!rest.empty()) throw detail::arch_error(item, "unexpected '" + std::string(rest) + "'");
      layers.push_back(LayerSpec::conv2d(current[0], channels, kernel, kernel, stride, padding));
    } else if (item.starts_with("pool:")) {
      std::string_view rest = item.substr(5);
      const std::size_t window = detail::take_number(rest, item);
      std::size_t stride = window;
      if (rest.starts_with('s')) {
        rest.remove_prefix(1);
        stride = detail::take_number(rest, item);
      }
      if (!rest.empty()) throw detail::arch_error(item, "unexpected '" + std::string(rest) + "'");
      layers.push_back(LayerSpec::maxpool2d(window, stride));
    } else if (item == "flatten") {
      layers.push_back(LayerSpec::flatten());
    } else {
      throw detail::arch_error(item, "unknown item (expected in:, dense:, conv:, pool:, "
                                     "flatten or relu)");
    }
    if (current.empty()) throw detail::arch_error(item, "input shape unknown; start with in:");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].kind == LayerKind::kDense || layers[i].kind == LayerKind::kFlatten) continue;
      current = layer_output_shape(layers[i], current, 0);
    }
    if (layers.back().kind == LayerKind::kFlatten) current = {shape_size(current)};
    items.push_back(std::move(layers));
  }
  for (auto& item : items) {
    arch.layers.insert(arch.layers.end(), item.begin(), item.end());
  }
  while (!arch.layers.empty() && arch.layers.back().kind == LayerKind::kRelu) {
    arch.layers.pop_back();
  }
  if (arch.layers.empty()) throw ConfigError("architecture has no layers");
  // Full composition check with layer-accurate messages.
  infer_shapes(arch.layers, arch.input_shape);
  return arch;
}

}  // namespace mcl
