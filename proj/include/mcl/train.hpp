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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcl/dataset.hpp"
#include "mcl/errors.hpp"
#include "mcl/metrics.hpp"
#include "mcl/network.hpp"
#include "mcl/rng.hpp"

namespace mcl {

// Plain mini-batch SGD with momentum.
struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool shuffle = true;

  TrainConfig() = default;

  TrainConfig(std::size_t epochs, std::size_t batch_size, double learning_rate, double momentum,
              std::uint64_t seed, bool shuffle = true)
      : epochs(epochs),
        batch_size(batch_size),
        learning_rate(learning_rate),
        momentum(momentum),
        seed(seed),
        shuffle(shuffle) {
    validate();
  }

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning rate must be positive, got " + std::to_string(learning_rate));
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw ConfigError("momentum must be in [0, 1), got " + std::to_string(momentum));
    }
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochStats {
  double loss = 0.0;            // mean over batches
  double train_accuracy = 0.0;  // top-1 over the batches seen this epoch
  std::optional<double> validation_accuracy;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// Computes loss and gradients for one mini-batch of example indices.
using BatchObjective = std::function<LossAndGradients(
    const Network&, std::span<const std::size_t> indices, std::size_t batch_index)>;

namespace detail {

inline void apply_masks(Network& net) {
  if (!net.masks) return;
  for (std::size_t l = 0; l < net.size(); ++l) {
    Tensor& w = net.params[l].weight;
    const Tensor& m = net.masks->layers[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m[i] == 0.0) w[i] = 0.0;
    }
  }
}

}  // namespace detail

// SGD loop shared by supervised training and distillation. Masked weights
// receive no update and stay exactly 0.0.
inline TrainReport run_sgd(Network& net, const LabeledDataset& data, const TrainConfig& cfg,
                           const BatchObjective& objective,
                           const LabeledDataset* validation = nullptr) {
  cfg.validate();
  data.validate();
  if (data.class_count > net.num_outputs) {
    throw ShapeError("dataset has " + std::to_string(data.class_count) +
                     " classes but network has " + std::to_string(net.num_outputs) + " outputs");
  }
  if (net.masks) {
    check_congruent(net, *net.masks);
    detail::apply_masks(net);
  }
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  Gradients velocity(net.size());
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (!net.params[l].weight.empty()) {
      velocity[l].weight = Tensor(net.params[l].weight.shape(), 0.0);
    }
    if (!net.params[l].bias.empty()) velocity[l].bias = Tensor(net.params[l].bias.shape(), 0.0);
  }

  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0, hits = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size, ++batches) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      std::span<const std::size_t> idx(order.data() + b, e - b);
      LossAndGradients lg;
      try {
        lg = objective(net, idx, batches);
      } catch (const DivergenceError& err) {
        throw DivergenceError(epoch, batches,
                              "training diverged at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batches) + ": " + err.what());
      }
      loss_sum += lg.loss;
      for (std::size_t r = 0; r < idx.size(); ++r) {
        hits += argmax(lg.logits.row(r)) == data.labels[idx[r]];
      }
      for (std::size_t l = 0; l < net.size(); ++l) {
        LayerParams& p = net.params[l];
        LayerParams& v = velocity[l];
        const LayerParams& g = lg.grads[l];
        const Tensor* mask = net.masks ? &net.masks->layers[l] : nullptr;
        for (std::size_t i = 0; i < p.weight.size(); ++i) {
          if (mask && (*mask)[i] == 0.0) continue;
          v.weight[i] = cfg.momentum * v.weight[i] + g.weight[i];
          p.weight[i] -= cfg.learning_rate * v.weight[i];
        }
        for (std::size_t i = 0; i < p.bias.size(); ++i) {
          v.bias[i] = cfg.momentum * v.bias[i] + g.bias[i];
          p.bias[i] -= cfg.learning_rate * v.bias[i];
        }
      }
    }
    EpochStats stats;
    stats.loss = loss_sum / static_cast<double>(batches);
    stats.train_accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
    if (validation) stats.validation_accuracy = evaluate_top1(net, *validation);
    report.epochs.push_back(stats);
  }
  return report;
}

// Supervised training on hard labels; mutates `net` in place.
inline TrainReport train(Network& net, const LabeledDataset& data, const TrainConfig& cfg,
                         const LabeledDataset* validation = nullptr) {
  BatchObjective objective = [&data](const Network& n, std::span<const std::size_t> idx,
                                     std::size_t batch_index) {
    std::vector<std::size_t> labels(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) labels[r] = data.labels[idx[r]];
    return loss_and_gradients(n, gather_rows(data.inputs, idx), Targets(std::move(labels)),
                              batch_index);
  };
  return run_sgd(net, data, cfg, objective, validation);
}

}  // namespace mcl
