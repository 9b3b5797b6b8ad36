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
#include <filesystem>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mcl/bytes.hpp"
#include "mcl/dataset.hpp"
#include "mcl/errors.hpp"
#include "mcl/rng.hpp"
#include "mcl/tensor.hpp"

namespace mcl {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarClasses = 10;

namespace detail {

inline ParseError idx_magic_error(const std::string& what, std::uint32_t got,
                                  std::uint32_t expected) {
  char buf[96];
  std::snprintf(buf, sizeof buf, ": unexpected magic 0x%08x (expected 0x%08x)", got, expected);
  return ParseError(ParseError::Kind::kBadMagic, what + buf);
}

}  // namespace detail

// Parses an IDX image/label pair. Images become [n, 1, rows, cols] scaled by
// 1/255. `class_count` 0 infers max(label) + 1.
inline LabeledDataset parse_idx(ByteView images, ByteView labels, std::size_t class_count = 0,
                                const std::string& images_name = "images",
                                const std::string& labels_name = "labels") {
  ByteReader img(images, images_name);
  ByteReader lab(labels, labels_name);
  const std::uint32_t img_magic = img.u32_be();
  if (img_magic != kIdxImagesMagic) {
    throw detail::idx_magic_error(images_name, img_magic, kIdxImagesMagic);
  }
  const std::uint32_t lab_magic = lab.u32_be();
  if (lab_magic != kIdxLabelsMagic) {
    throw detail::idx_magic_error(labels_name, lab_magic, kIdxLabelsMagic);
  }
  const std::uint64_t n_images = img.u32_be();
  const std::uint64_t rows = img.u32_be();
  const std::uint64_t cols = img.u32_be();
  const std::uint64_t n_labels = lab.u32_be();
  if (n_images != n_labels) {
    throw ParseError(ParseError::Kind::kCountMismatch,
                     "image count " + std::to_string(n_images) + " != label count " +
                         std::to_string(n_labels));
  }
  if (n_images == 0) throw ParseError(ParseError::Kind::kNoRecords, images_name + ": no records");
  if (rows == 0 || cols == 0) {
    throw ParseError(ParseError::Kind::kBadLength, images_name + ": zero image extent");
  }
  // Each factor is < 2^32, so the products below cannot overflow 64 bits
  // before being compared against the buffer.
  const std::uint64_t pixels = rows * cols;
  if (pixels > img.remaining() || n_images > img.remaining() / pixels) {
    img.require(std::numeric_limits<std::size_t>::max());
  }
  const std::size_t total = static_cast<std::size_t>(n_images * pixels);
  ByteView px = img.take(total);
  ByteView lb = lab.take(static_cast<std::size_t>(n_labels));
  if (img.remaining() != 0 || lab.remaining() != 0) {
    throw ParseError(ParseError::Kind::kBadLength, "trailing bytes after IDX payload");
  }
  LabeledDataset ds;
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = px[i] / 255.0;
  const auto n = static_cast<std::size_t>(n_images);
  ds.inputs = Tensor({n, 1, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)},
                     std::move(values));
  ds.labels.assign(lb.begin(), lb.end());
  const std::size_t max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
  if (class_count == 0) {
    class_count = max_label + 1;
  } else if (max_label >= class_count) {
    throw ParseError(ParseError::Kind::kLabelOutOfRange,
                     labels_name + ": label " + std::to_string(max_label) + " out of range");
  }
  ds.class_count = class_count;
  return ds;
}

inline LabeledDataset load_idx(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path,
                               std::size_t class_count = 0) {
  const Bytes images = read_file(images_path);
  const Bytes labels = read_file(labels_path);
  return parse_idx(images, labels, class_count, images_path.string(), labels_path.string());
}

inline std::uint8_t quantize_pixel(double v) {
  const double q = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(q);
}

// IDX image and label payloads for a dataset; inputs are clamped to [0,1]
// and quantized to bytes. [n, d] inputs are written as 1 x d images.
inline std::pair<Bytes, Bytes> encode_idx(const LabeledDataset& ds) {
  const Shape s = ds.input_shape();
  std::size_t rows = 1, cols = 1;
  if (s.size() == 1) {
    cols = s[0];
  } else {
    cols = s.back();
    rows = shape_size(s) / cols;
  }
  ByteWriter img, lab;
  img.u32_be(kIdxImagesMagic);
  img.u32_be(static_cast<std::uint32_t>(ds.size()));
  img.u32_be(static_cast<std::uint32_t>(rows));
  img.u32_be(static_cast<std::uint32_t>(cols));
  for (double v : ds.inputs.values()) img.u8(quantize_pixel(v));
  lab.u32_be(kIdxLabelsMagic);
  lab.u32_be(static_cast<std::uint32_t>(ds.size()));
  for (std::size_t l : ds.labels) {
    if (l > 255) throw ConfigError("label " + std::to_string(l) + " does not fit in a byte");
    lab.u8(static_cast<std::uint8_t>(l));
  }
  return {std::move(img.bytes()), std::move(lab.bytes())};
}

// Parses one CIFAR-10 binary batch (3073-byte records). Inputs [n,3,32,32].
inline LabeledDataset parse_cifar10(ByteView bytes, const std::string& name = "cifar batch") {
  if (bytes.empty()) throw ParseError(ParseError::Kind::kNoRecords, name + ": no records");
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw ParseError(ParseError::Kind::kBadLength,
                     name + ": length " + std::to_string(bytes.size()) +
                         " is not divisible by " + std::to_string(kCifarRecordBytes));
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  LabeledDataset ds;
  ds.class_count = kCifarClasses;
  ds.labels.resize(n);
  std::vector<double> values(n * (kCifarRecordBytes - 1));
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = bytes.data() + r * kCifarRecordBytes;
    if (rec[0] >= kCifarClasses) {
      throw ParseError(ParseError::Kind::kLabelOutOfRange,
                       name + ": label " + std::to_string(rec[0]) + " out of range in record " +
                           std::to_string(r));
    }
    ds.labels[r] = rec[0];
    double* out = values.data() + r * (kCifarRecordBytes - 1);
    for (std::size_t i = 1; i < kCifarRecordBytes; ++i) out[i - 1] = rec[i] / 255.0;
  }
  ds.inputs = Tensor({n, 3, 32, 32}, std::move(values));
  return ds;
}

inline LabeledDataset load_cifar10(const std::vector<std::filesystem::path>& batch_paths) {
  if (batch_paths.empty()) throw ConfigError("no CIFAR-10 batch files given");
  std::vector<LabeledDataset> parts;
  std::size_t n = 0;
  for (const auto& p : batch_paths) {
    const Bytes bytes = read_file(p);
    parts.push_back(parse_cifar10(bytes, p.string()));
    n += parts.back().size();
  }
  LabeledDataset ds;
  ds.class_count = kCifarClasses;
  std::vector<double> values;
  values.reserve(n * (kCifarRecordBytes - 1));
  for (const auto& part : parts) {
    values.insert(values.end(), part.inputs.values().begin(), part.inputs.values().end());
    ds.labels.insert(ds.labels.end(), part.labels.begin(), part.labels.end());
  }
  ds.inputs = Tensor({n, 3, 32, 32}, std::move(values));
  return ds;
}

// Centre of blob `c`. Centres sit on a circle in the first two dimensions
// with adjacent centres exactly `separation` apart (on a line for dims = 1).
inline std::vector<double> blob_center(std::size_t c, std::size_t classes, std::size_t dims,
                                       double separation) {
  std::vector<double> centre(dims, 0.0);
  if (dims == 1) {
    centre[0] = static_cast<double>(c) * separation;
  } else if (classes > 1) {
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / classes));
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / classes;
    centre[0] = radius * std::cos(angle);
    centre[1] = radius * std::sin(angle);
  }
  return centre;
}

// Unit-variance Gaussian clusters, class-major order.
inline LabeledDataset synth_blobs(std::size_t classes, std::size_t per_class, std::size_t dims,
                                  double separation, std::uint64_t seed) {
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw ConfigError("blob separation must be positive, got " + std::to_string(separation));
  }
  if (classes == 0 || per_class == 0 || dims == 0) {
    throw ConfigError("blob classes, per-class count and dims must be positive");
  }
  Rng rng(seed);
  LabeledDataset ds;
  ds.class_count = classes;
  std::vector<double> values;
  values.reserve(classes * per_class * dims);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto centre = blob_center(c, classes, dims, separation);
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < dims; ++d) values.push_back(centre[d] + rng.normal());
      ds.labels.push_back(c);
    }
  }
  ds.inputs = Tensor({classes * per_class, dims}, std::move(values));
  return ds;
}

// Images of one axis-aligned rectangle each on a noisy background; mask
// pixels are 1 inside the rectangle and 0 outside.
inline SegmentationDataset synth_segmentation(std::size_t n, std::size_t h, std::size_t w,
                                              std::uint64_t seed, double noise = 0.1) {
  if (n == 0) throw ConfigError("segmentation dataset needs at least one image");
  if (h < 4 || w < 4) {
    throw ConfigError("segmentation images must be at least 4x4, got " + std::to_string(h) +
                      "x" + std::to_string(w));
  }
  Rng rng(seed);
  SegmentationDataset ds;
  ds.class_count = 2;
  ds.images = Tensor({n, 1, h, w}, 0.0);
  ds.masks = IntTensor({n, h, w}, 0);
  for (std::size_t k = 0; k < n; ++k) {
    Rect r;
    r.y0 = rng.below(h - 1);
    r.y1 = r.y0 + 2 + rng.below(h - r.y0 - 1);
    r.x0 = rng.below(w - 1);
    r.x1 = r.x0 + 2 + rng.below(w - r.x0 - 1);
    ds.rects.push_back(r);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const bool inside = r.contains(y, x);
        ds.images[(k * h + y) * w + x] = (inside ? 1.0 : 0.0) + noise * rng.normal();
        ds.masks[(k * h + y) * w + x] = inside ? 1 : 0;
      }
    }
  }
  return ds;
}

// Seeded disjoint partition: floor(n * fraction) examples for training, the
// rest for validation. Both parts keep the original relative order.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                       double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must be in (0, 1), got " + std::to_string(fraction));
  }
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
  if (n_train == 0 || n_train == n) {
    throw ConfigError("split of " + std::to_string(n) + " examples at " +
                      std::to_string(fraction) + " leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {data.subset(train), data.subset(val)};
}

}  // namespace mcl
