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

#include "mcl/errors.hpp"
#include "mcl/tensor.hpp"

namespace mcl {

struct LabeledDataset {
  Tensor inputs;  // [n, ...input_shape]
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return labels.size(); }

  Shape input_shape() const {
    return Shape(inputs.shape().begin() + 1, inputs.shape().end());
  }

  void validate() const {
    if (labels.empty()) throw ConfigError("dataset is empty");
    if (inputs.rank() < 2 || inputs.dim(0) != labels.size()) {
      throw ShapeError("dataset inputs " + shape_string(inputs.shape()) + " do not hold " +
                       std::to_string(labels.size()) + " examples");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= class_count) {
        throw ConfigError("label " + std::to_string(labels[i]) + " at example " +
                          std::to_string(i) + " is not below class count " +
                          std::to_string(class_count));
      }
    }
  }

  // Rows `indices`, in that order.
  LabeledDataset subset(const std::vector<std::size_t>& indices) const {
    if (indices.empty()) throw ConfigError("subset would be empty");
    Shape shape = inputs.shape();
    shape[0] = indices.size();
    const std::size_t k = inputs.row_size();
    std::vector<double> values;
    values.reserve(indices.size() * k);
    LabeledDataset out;
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
      auto r = inputs.row(i);
      values.insert(values.end(), r.begin(), r.end());
      out.labels.push_back(labels.at(i));
    }
    out.inputs = Tensor(std::move(shape), std::move(values));
    out.class_count = class_count;
    return out;
  }

  // Same examples with each input reshaped to `input_shape` (equal size).
  LabeledDataset reshaped(const Shape& input_shape) const {
    Shape shape{size()};
    shape.insert(shape.end(), input_shape.begin(), input_shape.end());
    LabeledDataset out = *this;
    out.inputs = inputs.reshaped(std::move(shape));
    return out;
  }
};

// Axis-aligned rectangle [y0, y1) x [x0, x1).
struct Rect {
  std::size_t y0 = 0, x0 = 0, y1 = 0, x1 = 0;

  bool contains(std::size_t y, std::size_t x) const {
    return y >= y0 && y < y1 && x >= x0 && x < x1;
  }
};

struct SegmentationDataset {
  Tensor images;    // [n, c, h, w]
  IntTensor masks;  // [n, h, w] class ids
  std::size_t class_count = 0;
  std::vector<Rect> rects;  // generator metadata, one per image when synthetic

  std::size_t size() const { return images.empty() ? 0 : images.dim(0); }
};

}  // namespace mcl
