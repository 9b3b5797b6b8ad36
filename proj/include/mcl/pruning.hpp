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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcl/dataset.hpp"
#include "mcl/errors.hpp"
#include "mcl/mask.hpp"
#include "mcl/network.hpp"
#include "mcl/rng.hpp"
#include "mcl/train.hpp"

namespace mcl {

// random: weights removed uniformly at random over the whole network.
// class_uniform: the lowest-|w| fraction removed within every layer.
// class_blind: the lowest-|w| fraction removed network-wide, whatever the layer.
enum class Strategy { kRandom, kClassUniform, kClassBlind };

inline constexpr Strategy kAllStrategies[] = {Strategy::kRandom, Strategy::kClassUniform,
                                              Strategy::kClassBlind};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "random";
    case Strategy::kClassUniform: return "class_uniform";
    case Strategy::kClassBlind: return "class_blind";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown pruning strategy '" + std::string(name) +
                    "' (expected random, class_uniform or class_blind)");
}

struct PruneConfig {
  Strategy strategy = Strategy::kClassBlind;
  double fraction = 0.0;  // share of prunable weights to remove
  std::uint64_t seed = 0;  // random strategy only
  bool cascade = false;
  std::optional<TrainConfig> fine_tune;

  void validate() const {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
      throw ConfigError("pruning fraction must be in [0, 1], got " + std::to_string(fraction));
    }
    if (fine_tune) fine_tune->validate();
  }
};

// Number of weights removed out of `total` at `fraction`: floor(fraction * total).
inline std::size_t prune_count(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total)));
}

namespace detail {

struct WeightRef {
  double magnitude;
  std::size_t layer;
  std::size_t index;
};

// Ascending |w|, ties by (layer, flat index).
inline bool smaller(const WeightRef& a, const WeightRef& b) {
  if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
  if (a.layer != b.layer) return a.layer < b.layer;
  return a.index < b.index;
}

inline void mask_smallest(std::vector<WeightRef>& refs, std::size_t k, MaskSet& m) {
  if (k == 0) return;
  if (k < refs.size()) {
    std::nth_element(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     refs.end(), smaller);
  }
  // nth_element leaves the k smallest (under the strict total order) in
  // front.
  for (std::size_t i = 0; i < std::min(k, refs.size()); ++i) {
    m.layers[refs[i].layer][refs[i].index] = 0.0;
  }
}

}  // namespace detail

inline MaskSet build_mask(const Network& net, const PruneConfig& cfg) {
  cfg.validate();
  const std::size_t total = prunable_weight_count(net);
  if (total == 0) throw ConfigError("network has no prunable layers");
  MaskSet m = dense_masks(net);
  switch (cfg.strategy) {
    case Strategy::kClassBlind: {
      std::vector<detail::WeightRef> refs;
      refs.reserve(total);
      for (std::size_t l = 0; l < net.size(); ++l) {
        const Tensor& w = net.params[l].weight;
        for (std::size_t i = 0; i < w.size(); ++i) refs.push_back({std::abs(w[i]), l, i});
      }
      detail::mask_smallest(refs, prune_count(cfg.fraction, total), m);
      break;
    }
    case Strategy::kClassUniform: {
      for (std::size_t l = 0; l < net.size(); ++l) {
        const Tensor& w = net.params[l].weight;
        if (w.empty()) continue;
        std::vector<detail::WeightRef> refs;
        refs.reserve(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) refs.push_back({std::abs(w[i]), l, i});
        detail::mask_smallest(refs, prune_count(cfg.fraction, w.size()), m);
      }
      break;
    }
    case Strategy::kRandom: {
      // Global positions in (layer, flat index) order; a partial Fisher-Yates
      // pass draws k of them without replacement.
      std::vector<std::pair<std::size_t, std::size_t>> positions;
      positions.reserve(total);
      for (std::size_t l = 0; l < net.size(); ++l) {
        for (std::size_t i = 0; i < net.params[l].weight.size(); ++i) positions.emplace_back(l, i);
      }
      const std::size_t k = prune_count(cfg.fraction, total);
      Rng rng(cfg.seed);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(positions[i], positions[j]);
        m.layers[positions[i].first][positions[i].second] = 0.0;
      }
      break;
    }
  }
  return m;
}

// Copy of `net` holding mask `m` (combined with any mask it already had) and
// with every masked weight set to 0.0.
inline Network apply_mask(const Network& net, const MaskSet& m) {
  check_congruent(net, m);
  Network out = net;
  out.masks = net.masks ? intersect(*net.masks, m) : m;
  for (std::size_t l = 0; l < out.size(); ++l) {
    Tensor& w = out.params[l].weight;
    const Tensor& mask = out.masks->layers[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask[i] == 0.0) w[i] = 0.0;
    }
  }
  return out;
}

namespace detail {

// For the weighted layer `to`, which unit of the preceding weighted layer
// feeds each of its input groups (dense: input column, conv: input channel).
// Units are dense outputs or conv output channels.
inline std::vector<std::size_t> input_sources(const Network& net, std::size_t from,
                                              std::size_t to) {
  const LayerSpec& dst = net.layers[to];
  // Every layer between `from` and `to` is relu, maxpool or flatten, all of
  // which keep channel identity; flatten lays channels out contiguously.
  const Shape& in = net.input_shape_of(to);
  std::vector<std::size_t> src;
  if (dst.kind == LayerKind::kConv2d) {
    src.resize(dst.in_channels);
    std::iota(src.begin(), src.end(), 0);
    return src;
  }
  // Dense input column -> unit. If the unit layer is conv, the flattened
  // block of each channel maps back to that channel.
  const std::size_t units = net.layers[from].units();
  const std::size_t block = shape_size(in) / units;
  src.resize(dst.in_units);
  for (std::size_t e = 0; e < src.size(); ++e) src[e] = e / block;
  return src;
}

}  // namespace detail

// Forward dead-unit elimination to a fixpoint: when every incoming weight of
// a unit (dense neuron or conv channel) is masked and its bias is zero or
// absent, the unit outputs zero, so all of its outgoing weights are masked
// too. Only ever adds zeros.
inline MaskSet cascade_eliminate(const Network& net, const MaskSet& input) {
  check_congruent(net, input);
  MaskSet m = input;
  std::vector<std::size_t> weighted;
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (net.layers[l].has_weights()) weighted.push_back(l);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k + 1 < weighted.size(); ++k) {
      const std::size_t from = weighted[k], to = weighted[k + 1];
      const LayerSpec& src_spec = net.layers[from];
      const Tensor& src_mask = m.layers[from];
      const std::size_t units = src_spec.units();
      const std::size_t fan_in = src_mask.size() / units;
      const Tensor& bias = net.params[from].bias;
      std::vector<bool> dead(units, false);
      for (std::size_t u = 0; u < units; ++u) {
        if (!bias.empty() && bias[u] != 0.0) continue;
        bool all_masked = true;
        for (std::size_t i = 0; i < fan_in && all_masked; ++i) {
          all_masked = src_mask[u * fan_in + i] == 0.0;
        }
        dead[u] = all_masked;
      }
      const std::vector<std::size_t> src = detail::input_sources(net, from, to);
      Tensor& dst_mask = m.layers[to];
      const LayerSpec& dst = net.layers[to];
      const std::size_t out_units = dst.units();
      const std::size_t row = dst_mask.size() / out_units;  // weights per output unit
      const std::size_t group = row / src.size();          // weights per input group
      for (std::size_t o = 0; o < out_units; ++o) {
        for (std::size_t g = 0; g < src.size(); ++g) {
          if (!dead[src[g]]) continue;
          for (std::size_t t = 0; t < group; ++t) {
            double& v = dst_mask[o * row + g * group + t];
            if (v != 0.0) {
              v = 0.0;
              changed = true;
            }
          }
        }
      }
    }
  }
  return m;
}

// Live (unmasked) weights plus the biases of units that keep at least one
// live incoming weight.
inline std::size_t count_effective_params(const Network& net, const MaskSet& m) {
  check_congruent(net, m);
  std::size_t count = 0;
  for (std::size_t l = 0; l < net.size(); ++l) {
    const LayerSpec& s = net.layers[l];
    if (!s.has_weights()) continue;
    const Tensor& mask = m.layers[l];
    const std::size_t units = s.units();
    const std::size_t fan_in = mask.size() / units;
    for (std::size_t u = 0; u < units; ++u) {
      std::size_t live = 0;
      for (std::size_t i = 0; i < fan_in; ++i) live += mask[u * fan_in + i] != 0.0;
      count += live;
      if (s.has_bias && live > 0) ++count;
    }
  }
  return count;
}

inline std::size_t count_effective_params(const Network& net) {
  return count_effective_params(net, effective_masks(net));
}

// Continued training that keeps every masked weight at exactly 0.0.
inline Network fine_tune_masked(const Network& net, const LabeledDataset& data,
                                const TrainConfig& cfg, TrainReport* report = nullptr,
                                const LabeledDataset* validation = nullptr) {
  if (!net.masks) throw ConfigError("fine-tuning requires a masked network");
  cfg.validate();
  Network out = net;
  TrainReport r = train(out, data, cfg, validation);
  if (report) *report = std::move(r);
  return out;
}

struct PruneOutcome {
  Network masked_network;
  std::vector<double> kept_fraction_per_layer;  // one entry per weighted layer
  std::size_t effective_params = 0;
  std::size_t cascaded_extra = 0;  // weights removed by the cascade alone
};

// Mask construction, application, optional cascade and optional masked
// fine-tuning. `data` is required only when fine-tuning.
inline PruneOutcome prune(const Network& net, const PruneConfig& cfg,
                          const LabeledDataset* data = nullptr) {
  cfg.validate();
  if (cfg.fine_tune && !data) throw ConfigError("fine-tuning requested without a dataset");
  MaskSet m = build_mask(net, cfg);
  if (net.masks) m = intersect(*net.masks, m);
  PruneOutcome out;
  if (cfg.cascade) {
    const MaskSet cascaded = cascade_eliminate(net, m);
    out.cascaded_extra = m.live_count() - cascaded.live_count();
    m = cascaded;
  }
  out.masked_network = apply_mask(net, m);
  if (cfg.fine_tune) {
    out.masked_network = fine_tune_masked(out.masked_network, *data, *cfg.fine_tune);
  }
  const MaskSet& final_masks = *out.masked_network.masks;
  for (std::size_t l = 0; l < net.size(); ++l) {
    const Tensor& mask = final_masks.layers[l];
    if (!net.layers[l].has_weights()) continue;
    out.kept_fraction_per_layer.push_back(
        static_cast<double>(mask.size() - final_masks.masked_count(l)) /
        static_cast<double>(mask.size()));
  }
  out.effective_params = count_effective_params(out.masked_network, final_masks);
  return out;
}

}  // namespace mcl
