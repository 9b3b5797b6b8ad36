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
#include <vector>

#include "mcl/tensor.hpp"

namespace mcl {

// Binary keep-masks for the weight tensors of a network: one slot per layer,
// 1.0 keeps a connection and 0.0 removes it. Layers without weights hold an
// empty tensor. Biases are never masked.
struct MaskSet {
  std::vector<Tensor> layers;

  std::size_t live_count() const {
    std::size_t n = 0;
    for (const Tensor& m : layers) {
      for (double v : m.values()) n += v != 0.0;
    }
    return n;
  }

  std::size_t masked_count(std::size_t layer) const {
    std::size_t n = 0;
    for (double v : layers.at(layer).values()) n += v == 0.0;
    return n;
  }

  std::size_t masked_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) n += masked_count(i);
    return n;
  }

  friend bool operator==(const MaskSet&, const MaskSet&) = default;
};

// Pointwise product of two congruent mask sets (union of removed positions).
inline MaskSet intersect(const MaskSet& a, const MaskSet& b) {
  MaskSet out = a;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    for (std::size_t i = 0; i < out.layers[l].size(); ++i) {
      out.layers[l][i] = (a.layers[l][i] != 0.0 && b.layers.at(l)[i] != 0.0) ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace mcl
