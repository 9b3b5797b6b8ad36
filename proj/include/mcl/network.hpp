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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcl/errors.hpp"
#include "mcl/layers.hpp"
#include "mcl/mask.hpp"
#include "mcl/rng.hpp"
#include "mcl/tensor.hpp"

namespace mcl {

// Weight and bias of one layer. Both are empty for parameter-free layers;
// the bias is empty when the layer was declared without one.
struct LayerParams {
  Tensor weight;
  Tensor bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

using Gradients = std::vector<LayerParams>;

// Feed-forward layer stack. Plays both the teacher and the student role.
struct Network {
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;
  std::optional<MaskSet> masks;  // absent: fully dense
  Shape input_shape;
  std::size_t num_outputs = 0;
  std::vector<Shape> output_shapes;  // output shape of each layer

  std::size_t size() const { return layers.size(); }

  // Shape a layer consumes.
  const Shape& input_shape_of(std::size_t layer) const {
    return layer == 0 ? input_shape : output_shapes[layer - 1];
  }
};

// Builds a network with uniform(-b, b) weights, b = sqrt(6 / (fan_in +
// fan_out)), and zero biases. `input_shape` may be omitted when the first
// layer is dense.
inline Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed,
                            Shape input_shape = {}) {
  if (input_shape.empty() && !specs.empty()) {
    input_shape = natural_input_shape(specs.front());
  }
  Network net;
  net.layers = specs;
  net.input_shape = input_shape;
  net.output_shapes = infer_shapes(specs, input_shape);
  net.num_outputs = net.output_shapes.back()[0];
  net.params.resize(specs.size());
  Rng rng(seed);
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const LayerSpec& s = specs[l];
    if (!s.has_weights()) continue;
    const Shape ws = s.weight_shape();
    const std::size_t receptive = s.kind == LayerKind::kConv2d ? s.kernel_h * s.kernel_w : 1;
    const double fan_in = static_cast<double>(ws[1] * receptive);
    const double fan_out = static_cast<double>(ws[0] * receptive);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w(ws);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    net.params[l].weight = std::move(w);
    if (s.has_bias) net.params[l].bias = Tensor({s.units()}, 0.0);
  }
  return net;
}

// Total stored weights plus biases.
inline std::size_t parameter_count(const Network& net) {
  std::size_t n = 0;
  for (const LayerParams& p : net.params) n += p.weight.size() + p.bias.size();
  return n;
}

inline std::size_t prunable_weight_count(const Network& net) {
  std::size_t n = 0;
  for (const LayerParams& p : net.params) n += p.weight.size();
  return n;
}

// Mask set congruent with `net` with every entry set to `value`.
inline MaskSet uniform_masks(const Network& net, double value) {
  MaskSet m;
  m.layers.resize(net.size());
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (net.layers[l].has_weights()) m.layers[l] = Tensor(net.params[l].weight.shape(), value);
  }
  return m;
}

inline MaskSet dense_masks(const Network& net) { return uniform_masks(net, 1.0); }

// The network's own masks, or an all-ones set when it is dense.
inline MaskSet effective_masks(const Network& net) {
  return net.masks ? *net.masks : dense_masks(net);
}

inline void check_congruent(const Network& net, const MaskSet& m) {
  if (m.layers.size() != net.size()) {
    throw ShapeError("mask set has " + std::to_string(m.layers.size()) +
                     " layer slots, network has " + std::to_string(net.size()));
  }
  for (std::size_t l = 0; l < net.size(); ++l) {
    const Shape expected = net.layers[l].has_weights() ? net.params[l].weight.shape() : Shape{};
    if (m.layers[l].shape() != expected) {
      throw ShapeError("mask for layer " + std::to_string(l + 1) + " has shape " +
                       shape_string(m.layers[l].shape()) + ", weights have " +
                       shape_string(expected));
    }
    for (double v : m.layers[l].values()) {
      if (v != 0.0 && v != 1.0) {
        throw ShapeError("mask for layer " + std::to_string(l + 1) + " is not binary");
      }
    }
  }
}

inline void check_batch(const Network& net, const Tensor& batch) {
  if (batch.rank() != net.input_shape.size() + 1 ||
      !std::equal(net.input_shape.begin(), net.input_shape.end(), batch.shape().begin() + 1)) {
    throw ShapeError("batch shape " + shape_string(batch.shape()) + " does not match [n]+" +
                     shape_string(net.input_shape));
  }
}

// ---------------------------------------------------------------------------
// Kernels

namespace detail {

inline Tensor dense_forward(const LayerSpec& s, const LayerParams& p, const Tensor& x) {
  const std::size_t n = x.dim(0), in = s.in_units, out = s.out_units;
  // Transposed copy so the inner loop runs over contiguous outputs. Every
  // output still accumulates in ascending input order.
  std::vector<double> wt(in * out);
  for (std::size_t o = 0; o < out; ++o) {
    for (std::size_t i = 0; i < in; ++i) wt[i * out + o] = p.weight[o * in + i];
  }
  Tensor y({n, out});
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.data() + r * in;
    double* yr = y.data() + r * out;
    if (!p.bias.empty()) {
      std::copy(p.bias.data(), p.bias.data() + out, yr);
    }
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wrow = wt.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wrow[o];
    }
  }
  return y;
}

inline void dense_backward(const LayerSpec& s, const LayerParams& p, const Tensor& x,
                           const Tensor& dy, LayerParams& g, Tensor* dx) {
  const std::size_t n = x.dim(0), in = s.in_units, out = s.out_units;
  g.weight = Tensor(p.weight.shape(), 0.0);
  if (!p.bias.empty()) g.bias = Tensor(p.bias.shape(), 0.0);
  if (dx) *dx = Tensor(x.shape(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.data() + r * in;
    const double* dyr = dy.data() + r * out;
    double* dxr = dx ? dx->data() + r * in : nullptr;
    for (std::size_t o = 0; o < out; ++o) {
      const double go = dyr[o];
      if (!p.bias.empty()) g.bias[o] += go;
      if (go == 0.0) continue;
      double* gw = g.weight.data() + o * in;
      const double* w = p.weight.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) gw[i] += go * xr[i];
      if (dxr) {
        for (std::size_t i = 0; i < in; ++i) dxr[i] += go * w[i];
      }
    }
  }
}

inline Tensor conv_forward(const LayerSpec& s, const LayerParams& p, const Tensor& x,
                           const Shape& out_shape) {
  const std::size_t n = x.dim(0), c_in = s.in_channels, h = x.dim(2), w = x.dim(3);
  const std::size_t c_out = out_shape[0], oh = out_shape[1], ow = out_shape[2];
  const std::size_t kh = s.kernel_h, kw = s.kernel_w;
  const auto pad = static_cast<std::ptrdiff_t>(s.padding);
  Tensor y({n, c_out, oh, ow});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oc = 0; oc < c_out; ++oc) {
      const double bias = p.bias.empty() ? 0.0 : p.bias[oc];
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = bias;
          for (std::size_t ic = 0; ic < c_in; ++ic) {
            const double* plane = x.data() + ((b * c_in + ic) * h) * w;
            const double* kern = p.weight.data() + ((oc * c_in + ic) * kh) * kw;
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s.stride + ky) - pad;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * s.stride + kx) - pad;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                acc += kern[ky * kw + kx] * plane[iy * static_cast<std::ptrdiff_t>(w) + ix];
              }
            }
          }
          y[((b * c_out + oc) * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }
  return y;
}

inline void conv_backward(const LayerSpec& s, const LayerParams& p, const Tensor& x,
                          const Tensor& dy, LayerParams& g, Tensor* dx) {
  const std::size_t n = x.dim(0), c_in = s.in_channels, h = x.dim(2), w = x.dim(3);
  const std::size_t c_out = dy.dim(1), oh = dy.dim(2), ow = dy.dim(3);
  const std::size_t kh = s.kernel_h, kw = s.kernel_w;
  const auto pad = static_cast<std::ptrdiff_t>(s.padding);
  g.weight = Tensor(p.weight.shape(), 0.0);
  if (!p.bias.empty()) g.bias = Tensor(p.bias.shape(), 0.0);
  if (dx) *dx = Tensor(x.shape(), 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oc = 0; oc < c_out; ++oc) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const double go = dy[((b * c_out + oc) * oh + oy) * ow + ox];
          if (!p.bias.empty()) g.bias[oc] += go;
          if (go == 0.0) continue;
          for (std::size_t ic = 0; ic < c_in; ++ic) {
            const std::size_t plane_off = ((b * c_in + ic) * h) * w;
            const std::size_t kern_off = ((oc * c_in + ic) * kh) * kw;
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s.stride + ky) - pad;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * s.stride + kx) - pad;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                const std::size_t xi = plane_off + static_cast<std::size_t>(iy) * w +
                                       static_cast<std::size_t>(ix);
                g.weight[kern_off + ky * kw + kx] += go * x[xi];
                if (dx) (*dx)[xi] += go * p.weight[kern_off + ky * kw + kx];
              }
            }
          }
        }
      }
    }
  }
}

// Max pooling; `argmax` receives the flat input index chosen for every output
// element (first maximum in scan order).
inline Tensor pool_forward(const LayerSpec& s, const Tensor& x, const Shape& out_shape,
                           std::vector<std::size_t>& argmax) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  Tensor y({n, c, oh, ow});
  argmax.assign(y.size(), 0);
  std::size_t k = 0;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t plane = (b * c + ch) * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox, ++k) {
          std::size_t best = plane + (oy * s.stride) * w + ox * s.stride;
          for (std::size_t wy = 0; wy < s.window; ++wy) {
            for (std::size_t wx = 0; wx < s.window; ++wx) {
              const std::size_t idx = plane + (oy * s.stride + wy) * w + ox * s.stride + wx;
              if (x[idx] > x[best]) best = idx;
            }
          }
          y[k] = x[best];
          argmax[k] = best;
        }
      }
    }
  }
  return y;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward and backward passes

// Every intermediate activation of one forward pass; activations[0] is the
// input and activations[i + 1] the output of layer i.
struct ForwardTrace {
  std::vector<Tensor> activations;
  std::vector<std::vector<std::size_t>> pool_argmax;

  const Tensor& logits() const { return activations.back(); }
};

inline ForwardTrace forward_trace(const Network& net, const Tensor& batch) {
  check_batch(net, batch);
  const std::size_t n = batch.dim(0);
  ForwardTrace t;
  t.activations.reserve(net.size() + 1);
  t.activations.push_back(batch);
  t.pool_argmax.resize(net.size());
  for (std::size_t l = 0; l < net.size(); ++l) {
    const LayerSpec& s = net.layers[l];
    const Tensor& x = t.activations.back();
    Shape out_shape = net.output_shapes[l];
    Shape batched{n};
    batched.insert(batched.end(), out_shape.begin(), out_shape.end());
    Tensor y;
    switch (s.kind) {
      case LayerKind::kDense:
        y = detail::dense_forward(s, net.params[l], x);
        break;
      case LayerKind::kConv2d:
        y = detail::conv_forward(s, net.params[l], x, out_shape);
        break;
      case LayerKind::kRelu:
        y = x;
        for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
        break;
      case LayerKind::kMaxPool2d:
        y = detail::pool_forward(s, x, out_shape, t.pool_argmax[l]);
        break;
      case LayerKind::kFlatten:
      case LayerKind::kSoftmaxOutput:
        y = x.reshaped(batched);
        break;
    }
    t.activations.push_back(std::move(y));
  }
  return t;
}

// Logits [n, num_outputs].
inline Tensor forward(const Network& net, const Tensor& batch) {
  return std::move(forward_trace(net, batch).activations.back());
}

// Gradients of a scalar loss with respect to every parameter, given the
// gradient of that loss with respect to the logits.
inline Gradients backward(const Network& net, const ForwardTrace& trace,
                          const Tensor& dlogits) {
  Gradients grads(net.size());
  Tensor dy = dlogits;
  for (std::size_t l = net.size(); l-- > 0;) {
    const LayerSpec& s = net.layers[l];
    const Tensor& x = trace.activations[l];
    const bool need_dx = l > 0;
    Tensor dx;
    switch (s.kind) {
      case LayerKind::kDense:
        detail::dense_backward(s, net.params[l], x, dy, grads[l], need_dx ? &dx : nullptr);
        break;
      case LayerKind::kConv2d:
        detail::conv_backward(s, net.params[l], x, dy, grads[l], need_dx ? &dx : nullptr);
        break;
      case LayerKind::kRelu:
        dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i) {
          if (!(x[i] > 0.0)) dx[i] = 0.0;
        }
        break;
      case LayerKind::kMaxPool2d: {
        dx = Tensor(x.shape(), 0.0);
        const auto& argmax = trace.pool_argmax[l];
        for (std::size_t k = 0; k < argmax.size(); ++k) dx[argmax[k]] += dy[k];
        break;
      }
      case LayerKind::kFlatten:
      case LayerKind::kSoftmaxOutput:
        dx = dy.reshaped(x.shape());
        break;
    }
    if (!need_dx) break;
    dy = std::move(dx);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Softmax and cross-entropy

// Row-wise softmax(logits / temperature) with max subtraction.
inline Tensor softmax(const Tensor& logits, double temperature = 1.0) {
  if (!(temperature > 0.0)) {
    throw ConfigError("temperature must be positive, got " + std::to_string(temperature));
  }
  if (logits.rank() != 2) throw ShapeError("softmax expects [n, classes] logits");
  Tensor p(logits.shape());
  const std::size_t c = logits.dim(1);
  for (std::size_t r = 0; r < logits.dim(0); ++r) {
    auto in = logits.row(r);
    auto out = p.row(r);
    double mx = in[0] / temperature;
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, in[j] / temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[j] = std::exp(in[j] / temperature - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < c; ++j) out[j] /= sum;
  }
  return p;
}

// Row-wise log(softmax(logits / temperature)).
inline Tensor log_softmax(const Tensor& logits, double temperature = 1.0) {
  if (!(temperature > 0.0)) {
    throw ConfigError("temperature must be positive, got " + std::to_string(temperature));
  }
  Tensor out(logits.shape());
  const std::size_t c = logits.dim(1);
  for (std::size_t r = 0; r < logits.dim(0); ++r) {
    auto in = logits.row(r);
    auto o = out.row(r);
    double mx = in[0] / temperature;
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, in[j] / temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += std::exp(in[j] / temperature - mx);
    const double lse = std::log(sum);
    for (std::size_t j = 0; j < c; ++j) o[j] = in[j] / temperature - mx - lse;
  }
  return out;
}

// Hard class indices or a soft target distribution per example.
using Targets = std::variant<std::vector<std::size_t>, Tensor>;

// Dense [n, classes] distribution for either kind of target.
inline Tensor target_distribution(const Targets& targets, std::size_t n, std::size_t classes) {
  if (const auto* labels = std::get_if<std::vector<std::size_t>>(&targets)) {
    if (labels->size() != n) {
      throw ShapeError("expected " + std::to_string(n) + " labels, got " +
                       std::to_string(labels->size()));
    }
    Tensor t({n, classes}, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      if ((*labels)[r] >= classes) {
        throw ConfigError("label " + std::to_string((*labels)[r]) + " at row " +
                          std::to_string(r) + " is not below " + std::to_string(classes));
      }
      t.at(r, (*labels)[r]) = 1.0;
    }
    return t;
  }
  const Tensor& soft = std::get<Tensor>(targets);
  if (soft.shape() != Shape{n, classes}) {
    throw ShapeError("soft targets shape " + shape_string(soft.shape()) + " != [" +
                     std::to_string(n) + "," + std::to_string(classes) + "]");
  }
  for (std::size_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (double v : soft.row(r)) {
      if (!(v >= 0.0)) throw ConfigError("soft target row " + std::to_string(r) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("soft target row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
  return soft;
}

// Mean over rows of -sum_j t_j log p_j, where p = softmax(logits / T).
inline double cross_entropy(const Tensor& target_dist, const Tensor& logits,
                            double temperature = 1.0) {
  const Tensor logp = log_softmax(logits, temperature);
  double total = 0.0;
  for (std::size_t r = 0; r < logits.dim(0); ++r) {
    double row = 0.0;
    auto t = target_dist.row(r);
    auto lp = logp.row(r);
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] != 0.0) row -= t[j] * lp[j];
    }
    total += row;
  }
  return total / static_cast<double>(logits.dim(0));
}

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
  Tensor logits;
};

// Mean softmax cross-entropy against hard or soft targets, and its exact
// gradient. Gradients at masked positions are not zeroed here.
inline LossAndGradients loss_and_gradients(const Network& net, const Tensor& batch,
                                           const Targets& targets, std::size_t batch_index = 0) {
  ForwardTrace trace = forward_trace(net, batch);
  const Tensor& logits = trace.logits();
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  const Tensor t = target_distribution(targets, n, c);
  LossAndGradients out;
  out.loss = cross_entropy(t, logits);
  if (!std::isfinite(out.loss)) {
    throw DivergenceError(0, batch_index,
                          "non-finite loss in batch " + std::to_string(batch_index));
  }
  Tensor d = softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (d[i] - t[i]) * inv_n;
  out.grads = backward(net, trace, d);
  out.logits = logits;
  return out;
}

}  // namespace mcl
