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
#include <cstddef>
#include <string>
#include <vector>

#include "mcl/dataset.hpp"
#include "mcl/errors.hpp"
#include "mcl/network.hpp"
#include "mcl/tensor.hpp"

namespace mcl {

// Index of the largest entry; ties resolve to the lowest index.
inline std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

// Inputs of examples [begin, end) as one batch tensor.
inline Tensor gather_rows(const Tensor& inputs, std::size_t begin, std::size_t end) {
  Shape shape = inputs.shape();
  shape[0] = end - begin;
  const std::size_t k = inputs.row_size();
  return Tensor(std::move(shape), std::vector<double>(inputs.data() + begin * k,
                                                      inputs.data() + end * k));
}

inline Tensor gather_rows(const Tensor& inputs, std::span<const std::size_t> indices) {
  Shape shape = inputs.shape();
  shape[0] = indices.size();
  const std::size_t k = inputs.row_size();
  std::vector<double> values(indices.size() * k);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::copy_n(inputs.data() + indices[r] * k, k, values.data() + r * k);
  }
  return Tensor(std::move(shape), std::move(values));
}

// Logits for a whole dataset, computed in chunks.
inline Tensor predict_logits(const Network& net, const Tensor& inputs,
                             std::size_t chunk = 256) {
  const std::size_t n = inputs.dim(0);
  Tensor out({n, net.num_outputs});
  for (std::size_t b = 0; b < n; b += chunk) {
    const std::size_t e = std::min(n, b + chunk);
    const Tensor logits = forward(net, gather_rows(inputs, b, e));
    std::copy(logits.values().begin(), logits.values().end(),
              out.data() + b * net.num_outputs);
  }
  return out;
}

// Fraction of rows whose argmax equals the label.
inline double top1_from_logits(const Tensor& logits, const std::vector<std::size_t>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("logits " + shape_string(logits.shape()) + " do not match " +
                     std::to_string(labels.size()) + " labels");
  }
  std::size_t hits = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) hits += argmax(logits.row(r)) == labels[r];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

inline double evaluate_top1(const Network& net, const LabeledDataset& data) {
  if (data.class_count > net.num_outputs) {
    throw ShapeError("network has " + std::to_string(net.num_outputs) +
                     " outputs but dataset has " + std::to_string(data.class_count) +
                     " classes");
  }
  return top1_from_logits(predict_logits(net, data.inputs), data.labels);
}

// Pixels with equal class id over all pixels, pooled over every image.
inline double evaluate_global_pixel_accuracy(const IntTensor& predicted,
                                             const IntTensor& ground_truth) {
  if (predicted.shape() != ground_truth.shape()) {
    throw ShapeError("predicted masks " + shape_string(predicted.shape()) +
                     " != ground truth " + shape_string(ground_truth.shape()));
  }
  if (predicted.size() == 0) throw ShapeError("no pixels to compare");
  std::size_t equal = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) equal += predicted[i] == ground_truth[i];
  return static_cast<double>(equal) / static_cast<double>(predicted.size());
}

}  // namespace mcl
