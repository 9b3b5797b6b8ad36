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

// Reference implementations used as test oracles. They favour plain
// enumeration over speed and share no code with the library routines they
// check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <tuple>
#include <vector>

#include "mcl.hpp"

namespace mcl::oracle {

// Masks the floor(fraction * count) smallest |w| by a full sort, either
// across all layers or within each layer.
inline MaskSet sorted_magnitude_mask(const Network& net, double fraction, bool per_layer) {
  MaskSet m;
  for (std::size_t l = 0; l < net.size(); ++l) {
    m.layers.push_back(net.params[l].weight.empty() ? Tensor()
                                                    : Tensor(net.params[l].weight.shape(), 1.0));
  }
  using Entry = std::tuple<double, std::size_t, std::size_t>;
  auto mask_first = [&](std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(entries.size())));
    for (std::size_t i = 0; i < k; ++i) {
      m.layers[std::get<1>(entries[i])][std::get<2>(entries[i])] = 0.0;
    }
  };
  std::vector<Entry> all;
  for (std::size_t l = 0; l < net.size(); ++l) {
    std::vector<Entry> layer;
    const Tensor& w = net.params[l].weight;
    for (std::size_t i = 0; i < w.size(); ++i) layer.emplace_back(std::fabs(w[i]), l, i);
    if (per_layer) {
      mask_first(layer);
    } else {
      all.insert(all.end(), layer.begin(), layer.end());
    }
  }
  if (!per_layer) mask_first(all);
  return m;
}

// Unit fed by flat weight index `i` of weighted layer `l`.
inline std::size_t unit_of(const Network& net, std::size_t l, std::size_t i) {
  const Shape& ws = net.params[l].weight.shape();
  return i / (net.params[l].weight.size() / ws[0]);
}

// Input group (input column or input channel) read by flat weight index `i`.
inline std::size_t input_of(const Network& net, std::size_t l, std::size_t i) {
  const Shape& ws = net.params[l].weight.shape();
  if (ws.size() == 2) return i % ws[1];
  return (i / (ws[2] * ws[3])) % ws[1];
}

// Forward liveness propagation: a unit is alive when its bias is nonzero or
// one of its unmasked incoming weights reads a live source. Weights reading
// dead sources are masked.
inline MaskSet reachability_cascade(const Network& net, const MaskSet& input) {
  MaskSet m = input;
  std::vector<bool> alive_prev;  // liveness of the previous weighted layer's units
  std::size_t prev_units = 0;
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (!net.layers[l].has_weights()) continue;
    const Tensor& w = net.params[l].weight;
    const std::size_t units = w.shape()[0];
    // Which source unit an input group belongs to.
    auto source_alive = [&](std::size_t group) {
      if (alive_prev.empty()) return true;
      const Shape& in = net.input_shape_of(l);
      const std::size_t per_source = shape_size(in) / prev_units;
      const std::size_t src = w.rank() == 2 ? group / per_source : group;
      return static_cast<bool>(alive_prev[src]);
    };
    std::vector<bool> alive(units, false);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m.layers[l][i] == 0.0) continue;
      if (!source_alive(input_of(net, l, i))) {
        m.layers[l][i] = 0.0;
        continue;
      }
      alive[unit_of(net, l, i)] = true;
    }
    const Tensor& b = net.params[l].bias;
    for (std::size_t u = 0; u < b.size(); ++u) {
      if (b[u] != 0.0) alive[u] = true;
    }
    alive_prev = alive;
    prev_units = units;
  }
  return m;
}

// Live weights plus biases of units with a live incoming weight, by
// enumerating every weight position.
inline std::size_t effective_params(const Network& net, const MaskSet& m) {
  std::size_t count = 0;
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (!net.layers[l].has_weights()) continue;
    std::set<std::size_t> live_units;
    for (std::size_t i = 0; i < net.params[l].weight.size(); ++i) {
      if (m.layers[l][i] != 0.0) {
        ++count;
        live_units.insert(unit_of(net, l, i));
      }
    }
    if (net.layers[l].has_bias) count += live_units.size();
  }
  return count;
}

// Copy of `net` with masked weights multiplied out and no stored mask.
inline Network multiplied_out(const Network& net, const MaskSet& m) {
  Network out = net;
  out.masks.reset();
  for (std::size_t l = 0; l < out.size(); ++l) {
    Tensor& w = out.params[l].weight;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m.layers[l][i] == 0.0) w[i] = 0.0;
    }
  }
  return out;
}

// Fraction of rows whose first maximal entry sits at the label.
inline double top1(const Tensor& logits, const std::vector<std::size_t>& labels) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto row = logits.row(r);
    hits += static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) ==
            labels[r];
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

inline double pixel_accuracy(const IntTensor& a, const IntTensor& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace mcl::oracle
